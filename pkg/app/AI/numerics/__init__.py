from .network import Approximator, OutputActivation, soft_update, parameter_distance, save_checkpoint, load_checkpoint
from .optimizer import OptimizerState, opt_step
from .gradcheck import finite_diff_check, relative_error, numeric_param_gradient, numeric_input_gradient
