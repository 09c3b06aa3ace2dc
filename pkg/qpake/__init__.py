"""
qpake is a desk-scale simulator for a password-authenticated key exchange built on BB84 quantum key
distribution. It runs the full message flow of the protocol over a simulated quantum channel against
scripted adversaries, wraps the classical flows in a split-authentication compiler, evaluates the
security bounds of the construction, and checks OT-cores of finite two-party functions.
Quantum adversaries are limited to product-state measure and resend strategies; the bounds module
covers the general case numerically.
The qpake library is distributed under the BSD2 open source license.
"""

from qpake.utils import QPakeError, LogFile, Progress, verify, make_rng
from qpake.qchannel import Basis, QuantumRegister, encode_bb84, measure, apply_channel
from qpake.gf2 import BitString, UniversalHash, SyndromeFamily, PasswordCode
from qpake.crypto import GroupParams, keygen, commit, verify_open, equivocate, extract, sign, verify_sig
from qpake.pake import ProtocolParams, make_params, new_session, advance, run_session, replay_transcript
from qpake.splitauth import link_init, wrap_message, unwrap_message
from qpake.harness import AdversaryScript, run_experiment, estimate_uniformity, compare_real_ideal
from qpake.bounds import bounds_input, bounds_report, plan_parameters
from qpake.feasibility import TwoPartyFunction, is_ot_core, find_ot_cores, equality_function
__version__ = '0.1.0'
__all__ = ["QPakeError", "LogFile", "Progress", "verify", "make_rng", "Basis", "QuantumRegister", "encode_bb84",
           "measure", "apply_channel", "BitString", "UniversalHash", "SyndromeFamily", "PasswordCode",
           "GroupParams", "keygen", "commit", "verify_open", "equivocate", "extract", "sign", "verify_sig",
           "ProtocolParams", "make_params", "new_session", "advance", "run_session", "replay_transcript",
           "link_init", "wrap_message", "unwrap_message", "AdversaryScript", "run_experiment",
           "estimate_uniformity", "compare_real_ideal", "bounds_input", "bounds_report", "plan_parameters",
           "TwoPartyFunction", "is_ot_core", "find_ot_cores", "equality_function"]
