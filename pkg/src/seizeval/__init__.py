"""seizeval: real-time EEG seizure detection pipeline and scoring toolkit."""

from .core import (
    Event,
    LabelTrack,
    Montage,
    MontageSpec,
    Recording,
    SeizureLabel,
    SignalTypeClass,
    SynthConfig,
    WindowClass,
    WindowSpec,
    balanced_batches,
    classify_segment,
    resample,
    slice_windows,
    synth_recording,
    to_bipolar,
    window_label,
    window_labels,
)
from .detectors import (
    DetectorState,
    EnergyDetector,
    LinearDetector,
    LinearModel,
    TrainConfig,
    detect_window,
    reset_state,
    train_linear,
)
from .features import (
    BandSpec,
    FeatureTensor,
    LfccParams,
    MultiRateParams,
    SincBank,
    StftParams,
    design_sinc_kernel,
    extract_raw,
    frequency_bands,
    lfcc,
    multirate,
    sinc_filterbank,
    stft,
)
from .metrics import (
    ConfusionCounts,
    EventizeOpts,
    HypothesisTrack,
    MetricsReport,
    curve_metrics,
    epoch_counts,
    eventize,
    evaluate_track,
    fa_per_24h,
    margin,
    onset_latency,
    operating_points,
    ovlp,
    taes,
)
from .rtbench import LatencyReport, batch_scores, check_realtime, run_stream

__version__ = "0.1.0"
