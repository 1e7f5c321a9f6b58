"""Function spaces of two-layer and residual ReLU networks.

Atomic Barron-space representations and their norms, Monte Carlo network
sampling, mean-field flows of residual networks with compositional norms,
Rademacher complexity estimates, and a seeded study harness.
"""
from .errors import (BarronLabError, ConfigError, DivergenceError, FitError,
                     InvalidParameterError, RangeError, StudyAborted, UnsupportedTargetError)
from .measures import (NeuronAtom, TwoLayerMeasure, TwoLayerNet, barron_norm, canonicalize_atom,
                       measure_from_network, random_measure, symmetrize)
from .shallow import (QuadratureSpec, TargetFunction, eval_two_layer, kernel_gram, kernel_kpi,
                      l2_distance, path_norm_two_layer, sample_network, spectral_bound)
from .deep import (CompositionalFunction, FlowResult, LayerAtom, LipschitzEstimate, ResidualNet,
                   ResidualSchedule, Segment, canonicalize_layer_atoms, comp_norms, compose_barron,
                   embed_barron, eval_resnet, flow_Np, flow_z, inverse_dinf_bound, matrix_exp_nonneg,
                   random_schedule, resnet_path_norm, sample_resnet, schedule_from_resnet,
                   schedule_lipschitz, smoothed_activation, smoothed_relu)
from .complexity import (RadEstimate, SampleSet, barron_rad_bound, comp_rad_bound,
                         empirical_rad_family, empirical_rad_linear)
from .lab import StudyConfig, StudyReport, rate_fit, run_study

__version__ = "0.1.0"
