from .countermeasures import Variant
from .cpa import Target, attack_schedule, cpa_byte, kkc, mtd_curve
from .lda import lda_predict, lda_train
from .leakage import LeakageModel, simulate_trace, simulate_trace_set
from .recovery import incremental_recover
from .snowv import Iv128, Key256, initialize, keystream, lfsr_update
from .traceset import TraceSet, load_trace_set, store_trace_set
from .tvla import tvla_incremental, welch_t

__version__ = '0.1.0'
