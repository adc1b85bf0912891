"""Off-grid sparse Bayesian channel estimation for delay-Doppler (OTFS) frames."""

from .channel import ChannelGenConfig, ChannelPath, ChannelRealization, effective_channel, generate_channel
from .config import ESTIMATORS, ConfigError, ExperimentConfig, load_config
from .frame import OtfsConfig, build_frame, synthesize_rx
from .metrics import nmse, reconstruct_effective
from .sbl1d import SblOptions, run_sbl_1d
from .sbl2d import run_sbl_2d
from .ssr import build_grid, build_measurement

__all__ = [
    "ChannelGenConfig", "ChannelPath", "ChannelRealization", "effective_channel", "generate_channel",
    "ESTIMATORS", "ConfigError", "ExperimentConfig", "load_config",
    "OtfsConfig", "build_frame", "synthesize_rx",
    "nmse", "reconstruct_effective",
    "SblOptions", "run_sbl_1d", "run_sbl_2d",
    "build_grid", "build_measurement",
]
