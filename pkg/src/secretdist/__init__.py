"""Exact models of secret correlations, intrinsic information and the LOPC
protocol that distributes secrecy through a private channel, plus a small
density-matrix engine for the matching quantum example."""

__version__ = "0.1.0"

from .dist_core import (
    JointDistribution,
    Party,
    VariableDef,
    apply_local_function,
    build_distribution,
    condition,
    marginal,
    paper_distribution,
    transfer_ownership,
)
from .info import InfoQuery, conditional_mutual_information, entropy, mutual_information
from .intrinsic import (
    Channel,
    IntrinsicResult,
    OptimizerConfig,
    apply_channel,
    certify_zero_cmi,
    cmi_under_channel,
    intrinsic_information_upper_bound,
)
from .protocol import (
    ProtocolStep,
    ProtocolTrace,
    SbitVerdict,
    cnot_step,
    is_perfect_sbit,
    postselect,
    private_send,
    run_paper_protocol,
    run_protocol,
    untrusted_courier_demo,
)
