"""Secrecy coding over erasure channels with ARQ, built on LDPC stopping sets."""

from .analytics import (
    attack_bounds,
    expected_d,
    pr_d_geq,
    pr_ref_collab,
    pr_ref_general,
    pr_ref_receivers,
    pr_ref_single,
    surface,
    threshold_contour,
)
from .channel import ChannelTopology, run_e2e, run_session, simulate_packets, transmit_packet
from .codec import (
    NotDecodableError,
    PacketBatch,
    Scrambler,
    bob_decode,
    descramble,
    encode_batch,
    eve_dof,
    eve_guess_attack,
    gen_scrambler,
    scramble,
)
from .decode import ERASED, ErasureWord, ml_decode, mp_decode
from .gf2 import BitMatrix, SingularMatrixError, invert, rank, rref, solve
from .ldpc import (
    EXAMPLE1_IRREGULAR,
    ConstructionError,
    DegreeDistribution,
    LdpcCode,
    TannerGraph,
    build_irregular,
    build_regular,
    code_from_matrix,
    read_alist,
    tanner_graph,
    write_alist,
)
from .stopping import PuncturePattern, find_acceptable_pattern, find_maximal, is_stopping_set, verify_acceptable

__version__ = "0.1.0"
