"""Link-level simulator for likelihood ascent search detection in large MIMO systems."""

from .capacity import CapacityEstimate, capacity_curve, ergodic_capacity
from .detectors import (
    DetectorOutput,
    EffectiveSystem,
    OpCounter,
    SingularChannelError,
    build_effective,
    likelihood,
    mf_detect,
    ml_oracle,
    mmse_detect,
    real_decompose,
    zf_detect,
    zf_sic_detect,
)
from .las import (
    CheckPolicy,
    LasRunStats,
    LasState,
    PolicyKind,
    las_init,
    las_run,
    las_step,
    step_statistics,
    threshold,
)
from .mccdma import (
    McCdmaConfig,
    SubcarrierSystem,
    build_effective_mc,
    draw_subcarrier_systems,
    mccdma_detect,
    mrc_su_ber,
    simulate_received,
)
from .model import (
    ChannelMatrix,
    Modulation,
    NoiseSpec,
    TxFrame,
    generate_channel,
    perturb_channel,
    q_func,
    siso_awgn_ber,
    siso_rayleigh_ber,
    transmit,
)
from .sim import (
    BerCell,
    Cell,
    ConfigError,
    Experiment,
    ResultRow,
    read_csv,
    run_experiment,
    wilson_ci,
    write_csv,
)
from .stbc import (
    EquivalentChannel,
    StbcCode,
    StbcParam,
    build_code,
    encode,
    linearize,
    stbc_decode_las,
)

__version__ = "0.1.0"
