"""Fixed-confidence best arm identification for Bernoulli bandits under
epsilon-global differential privacy: private divergences, transportation
costs, the characteristic-time oracle, the geometric private estimator, GLR
stopping, top-two sampling rules and a seeded Monte Carlo harness."""

from .divergences import (DivergenceRegime, PrivacyParams, d_eps_unsigned,
                          d_minus, d_plus, d_plus_dmu, d_tilde_minus,
                          d_tilde_plus, invert_d_tilde)
from .gpe import GeometricPrivateEstimator, Snapshot
from .harness import (ExperimentConfig, RunRecord, load_config, monte_carlo,
                      run_episode, sweep_epsilon)
from .oracle import (BanditInstance, DegenerateInstanceError, OracleSolution,
                     beta_characteristic_time, characteristic_time,
                     low_privacy_check, lower_bound_time, regime_boundary)
from .scalars import (ScalarDomainError, f_envelope, g_eps_minus, g_eps_plus,
                      h_inv, h_rate, k_eta, kl, lambert_bar, r_ratio)
from .stopping import (StopDecision, glr_stop, lucb_stop, modified_glr_stop,
                       threshold_c, threshold_c_tilde)
from .transport import (TransportCase, TransportResult, transport_cost,
                        transport_cost_grid, transport_cost_modified)

__version__ = "0.1.0"
