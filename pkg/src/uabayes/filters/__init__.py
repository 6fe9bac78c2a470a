from .imm import ImmBank, combine_moments, imm_cycle, run_imm_batch, run_ua_imm, ua_imm_step
from .kalman import UAKalmanFilter, joseph_update, kalman_predict, ua_kalman_filter, ua_kalman_step
from .metrics import rtamse
from .models import LinearSSM, NonlinearSSM
from .particle import (
    ParticleDraws,
    ParticleSet,
    UAParticleFilter,
    effective_sample_size,
    run_ua_pf,
    systematic_indices,
    systematic_resample,
    temper_weights,
    ua_pf_reweight,
    ua_pf_step,
)
