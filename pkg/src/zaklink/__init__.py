"""Link-level simulator for delay-Doppler and CP-OFDM waveforms."""

from .dd_core import (
    DiscreteDDFilter,
    FrameDims,
    QuasiPeriodicGrid,
    compose_filters,
    discrete_twisted_convolve,
    discrete_zak_transform,
    identity_filter,
    inverse_discrete_zak_transform,
)
from .channel import (
    ChannelDrawConfig,
    DDSpreadingFunction,
    TdSignal,
    VEH_A_PDP,
    add_awgn,
    apply_channel_td,
    coherence_metrics,
    draw_veh_a,
)
from .pulses import PulseShape, make_pulse
from .effective_channel import ground_truth_heff
from .zak_modem import (
    EffectiveChannelEstimate,
    FrameLayout,
    acquire_channel,
    build_layout,
    check_crystallization,
    compose_frame,
    demodulate,
    dd_noise_factor,
    effective_pnr_db,
    filter_nmse_db,
    lsmr_equalize,
    make_pilot_grid,
    modulate,
)

__version__ = "0.1.0"
