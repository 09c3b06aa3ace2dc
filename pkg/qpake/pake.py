"""
The password-authenticated quantum key exchange as two explicit state machines
(client and server), their wire format, and a runner that drives both to termination.
Requires numpy and the json module.
PEP8
"""
import hashlib
import json
from collections import namedtuple
from fractions import Fraction
from functools import lru_cache
import numpy
from qpake.utils import freezable_factory, verify, intish, numericish, stringish, dictish, containerish
from qpake.utils import QPakeError, make_rng, spawn_seeds, random_below, random_seed, verify_seed
from qpake import qchannel
from qpake.gf2 import BitString, SyndromeFamily, PasswordCode, UniversalHash, DEFAULT_FAMILY_SIZE
from qpake.gf2 import sample_password_code, password_encode, syndrome_compute, syndrome_decode, decode_candidate
from qpake.gf2 import sample_two_universal, hash_eval, hamming_distance, as_bit_string
from qpake.crypto import GroupParams, CommitKey, Commitment, Opening, BINDING
from qpake.crypto import generate_group, keygen, commit_bits, verify_open

CLIENT = "client"
SERVER = "server"
_directions = {CLIENT: "C->S", SERVER: "S->C"}

ZERO, ONE1, ONE2, ONE3 = "Zero", "One1", "One2", "One3"
TWO1, TWO2, TWO3 = "Two1", "Two2", "Two3"
THREE1, THREE2, FOUR, FIVE = "Three1", "Three2", "Four", "Five"
FLOW_TAGS = (ZERO, ONE1, ONE2, ONE3, TWO1, TWO2, TWO3, THREE1, THREE2, FOUR, FIVE)
CLASSICAL_TAGS = FLOW_TAGS[1:]
FLOW_SENDER = {ZERO: CLIENT, ONE1: SERVER, ONE2: CLIENT, ONE3: SERVER, TWO1: CLIENT, TWO2: SERVER,
               TWO3: CLIENT, THREE1: SERVER, THREE2: CLIENT, FOUR: CLIENT, FIVE: SERVER}

COMMITMENT_VERIFICATION = "commitment verification"
ERROR_RATE = "error rate"
DECODE_FAILURE = "decode failure"
PROTOCOL_ERROR = "protocol error"
MALFORMED_PAYLOAD = "malformed payload"
AUTHENTICATION = "authentication"
TIMEOUT = "timeout"
ABORT_REASONS = (COMMITMENT_VERIFICATION, ERROR_RATE, DECODE_FAILURE, PROTOCOL_ERROR, MALFORMED_PAYLOAD,
                 AUTHENTICATION, TIMEOUT)

def _as_fraction(x, name):
    verify(isinstance(x, Fraction) or numericish(x) or stringish(x), "%s needs to be a number" % name)
    try:
        return x if isinstance(x, Fraction) else Fraction(str(x))
    except ValueError:
        raise QPakeError("%s needs to be a number, got %s" % (name, x))

class ProtocolParams(freezable_factory(object, "_isFrozen")):
    """
    All public parameters of the protocol. Use make_params to build a consistent set from scratch.
    """
    def __init__(self, lam, k, alpha, tau, gamma, beta, dictionary, crs, family):
        """
        :param lam: session key bits

        :param k: qubit count

        :param alpha: test fraction per round, alpha * k needs to be integral

        :param tau: error threshold, each test round accepts an error rate of at most tau/2

        :param gamma: password code distance rate

        :param beta: syndrome family bias rate

        :param dictionary: PasswordCode with codewords of n = k - 2 alpha k bases

        :param crs: (ck, ck_prime) commitment keys over a common group

        :param family: SyndromeFamily over blocks of ell = ceil(n/2) bits
        """
        verify(intish(lam) and lam >= 1, "lambda needs to be a positive integer")
        verify(intish(k) and k >= 1, "k needs to be a positive integer")
        alpha, tau = _as_fraction(alpha, "alpha"), _as_fraction(tau, "tau")
        verify(0 < alpha < Fraction(1, 2), "alpha needs to be in (0, 1/2)")
        verify((alpha * k).denominator == 1, "alpha * k needs to be integral")
        n = k - 2 * int(alpha * k)
        verify(n >= 1, "n = k - 2 alpha k needs to be at least 1")
        verify(0 < tau < Fraction(1, 2), "tau needs to be in (0, 1/2)")
        verify(numericish(gamma) and 0 <= gamma <= 1, "gamma needs to be in [0, 1]")
        verify(numericish(beta) and beta > 0, "beta needs to be positive")
        verify(isinstance(dictionary, PasswordCode), "dictionary needs to be a PasswordCode")
        verify(dictionary.codeword_len == n, "the password code needs codewords of length n = %s" % n)
        verify(dictionary.min_distance >= gamma * n - 1e-9, "the password code needs distance gamma * n")
        verify(containerish(crs) and len(crs) == 2 and all(isinstance(_, CommitKey) for _ in crs),
               "crs needs to be a pair of CommitKey")
        verify(crs[0].params == crs[1].params, "both commitment keys need the same group")
        ell = (n + 1) // 2
        verify(isinstance(family, SyndromeFamily) and family.block_len == ell,
               "the syndrome family needs blocks of ell = %s bits" % ell)
        verify(lam <= ell, "lambda can't exceed ell = %s" % ell)
        self.lam, self.k, self.alpha, self.tau, self.gamma, self.beta = lam, k, alpha, tau, gamma, beta
        self.n, self.ell, self.test_size = n, ell, int(alpha * k)
        self.dictionary, self.crs, self.family = dictionary, tuple(crs), family
        self.group = crs[0].params
        self._isFrozen = True
    @property
    def dictionary_size(self):
        return self.dictionary.dictionary_size
    def to_dict(self):
        code = self.dictionary
        return {"lambda": self.lam, "k": self.k, "alpha": str(self.alpha), "tau": str(self.tau),
                "gamma": self.gamma, "beta": self.beta, "n": self.n, "ell": self.ell,
                "dictionary": code.to_dict() if code.seed is not None else
                              {"table": [_.to_hex() for _ in code.table], "gamma": code.gamma},
                "crs": [ck.to_dict() for ck in self.crs],
                "family": dict(self.family.to_dict(), tau=str(self.family.tau)),
                "group": self.group.to_dict()}
    def fingerprint(self):
        """
        SHA-256 over the canonical json of the public parameters
        """
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode("utf-8")).hexdigest()

@lru_cache(maxsize=16)
def _setup_group(setup_seed, group_bits):
    return generate_group(group_bits, make_rng(setup_seed, 1))

def make_params(lam=16, k=64, alpha="1/4", tau="0.1", gamma=0.25, beta=0.5, dictionary_size=16,
                setup_seed=0, group=None, group_bits=64, family_size=DEFAULT_FAMILY_SIZE, syndrome_len=None,
                code=None, crs_mode=BINDING):
    """
    Build a consistent ProtocolParams. The group, the common reference string, the password code
    and the syndrome family are all deterministic functions of setup_seed.

    :param group: optional GroupParams; a safe-prime group of group_bits bits is generated otherwise

    :param code: optional PasswordCode; a random linear code is sampled otherwise

    :return: ProtocolParams
    """
    verify_seed(setup_seed)
    alpha = _as_fraction(alpha, "alpha")
    verify(intish(k) and k >= 1 and (alpha * k).denominator == 1, "alpha * k needs to be integral")
    n = k - 2 * int(alpha * k)
    verify(n >= 1, "n = k - 2 alpha k needs to be at least 1")
    group = group if group is not None else _setup_group(setup_seed, group_bits)
    verify(isinstance(group, GroupParams), "group needs to be a GroupParams")
    crs_rng = make_rng(setup_seed, 2)
    crs = (keygen(group, crs_mode, crs_rng)[0], keygen(group, crs_mode, crs_rng)[0])
    code_seed, family_seed = spawn_seeds(setup_seed, 2)
    if code is None:
        code = sample_password_code(dictionary_size, n, gamma, code_seed)
    family = SyndromeFamily((n + 1) // 2, syndrome_len, _as_fraction(tau, "tau"), beta, family_size, family_seed)
    return ProtocolParams(lam, k, alpha, tau, gamma, beta, code, crs, family)

Flow = namedtuple("Flow", ["tag", "payload"])
SessionKey = namedtuple("SessionKey", ["bits"])

class Outcome(namedtuple("Outcome", ["kind", "value"])):
    """
    pending, key (value is a SessionKey) or abort (value is the reason)
    """
    @property
    def is_key(self):
        return self.kind == "key"
    @property
    def is_abort(self):
        return self.kind == "abort"
    @property
    def is_pending(self):
        return self.kind == "pending"
    @property
    def key(self):
        return self.value.bits if self.is_key else None
    @property
    def reason(self):
        return self.value if self.is_abort else None
    def to_dict(self):
        if self.is_key:
            return {"kind": "key", "key": self.key.to_hex(), "bits": len(self.key)}
        return {"kind": self.kind, "reason": self.value}
    @classmethod
    def from_dict(cls, d):
        if d["kind"] == "key":
            return cls("key", SessionKey(BitString.from_hex(d["key"], d["bits"])))
        return cls(d["kind"], d.get("reason"))

PENDING = Outcome("pending", None)

def relative_hamming(a, b):
    """
    r_H(a, b) = d_H(a, b) / |a|, defined as 0 for empty strings.

    :return: Fraction
    """
    a, b = as_bit_string(a), as_bit_string(b)
    verify(len(a) == len(b), "relative hamming distance needs equal lengths")
    return Fraction(hamming_distance(a, b), len(a)) if len(a) else Fraction(0)

def sift_indices(phi, phi_hat):
    """
    :return: sorted (0-based) positions where phi and phi_hat agree
    """
    phi, phi_hat = as_bit_string(phi), as_bit_string(phi_hat)
    verify(len(phi) == len(phi_hat), "phi and phi_hat need equal lengths")
    return numpy.flatnonzero(phi.to_array() == phi_hat.to_array()).tolist()

def sample_subset(rng, population, size):
    """
    uniform size-subset of population without replacement (seeded shuffle), sorted
    """
    population = list(population)
    verify(0 <= size <= len(population), "can't sample %s items from %s" % (size, len(population)))
    perm = rng.permutation(len(population))
    return sorted(population[i] for i in perm[:size])

def _select(arr, indices):
    return BitString.from_bits(numpy.asarray(arr, dtype=numpy.uint8)[list(indices)]
                               if len(indices) else [])

def _commit_pairs(ck, bits, bases, rng):
    # one (bit, basis) commitment pair per position
    interleaved = numpy.column_stack([numpy.asarray(bits), numpy.asarray(bases)]).ravel()
    commitments, openings = commit_bits(ck, interleaved, rng)
    return (list(zip(commitments[0::2], commitments[1::2])),
            list(zip(openings[0::2], openings[1::2])))

# wire codec

def _hex_exp(params, x):
    return "%0*x" % (2 * params.group.exponent_bytes, x)

def _encode_commitments(params, pairs):
    g = params.group
    return [[g.element_to_hex(cx.c1), g.element_to_hex(cx.c2), g.element_to_hex(ct.c1), g.element_to_hex(ct.c2)]
            for cx, ct in pairs]

def _encode_openings(params, pairs):
    return [[[o.m, _hex_exp(params, o.r), _hex_exp(params, o.s)] for o in pair] for pair in pairs]

def _encode_payload(params, flow):
    p = flow.payload
    if flow.tag == ZERO:
        return {"k": p["register"].length, "qubits": p["register"].to_hex()}
    if flow.tag == ONE1:
        return {"commitments": _encode_commitments(params, p["commitments"])}
    if flow.tag == TWO1:
        return {"indices": list(p["indices"]), "commitments": _encode_commitments(params, p["commitments"])}
    if flow.tag in (ONE2, TWO2):
        return {"indices": list(p["indices"])}
    if flow.tag in (ONE3, TWO3):
        return {"openings": _encode_openings(params, p["openings"])}
    if flow.tag == THREE1:
        return {"phi_hat": p["phi_hat"].to_hex()}
    if flow.tag == THREE2:
        return {"phi": p["phi"].to_hex()}
    if flow.tag == FOUR:
        return {"j": p["j"], "s": p["s"].to_hex()}
    verify(flow.tag == FIVE, "unknown flow tag %s" % (flow.tag,))
    return {"hash": p["hash"].to_dict()}

def flow_record(params, session_id, flow):
    return {"session_id": session_id, "tag": flow.tag, "payload": _encode_payload(params, flow)}

def _dumps(record):
    return json.dumps(record, sort_keys=True, separators=(",", ":")).encode("utf-8")

def encode_flow(params, session_id, flow):
    """
    :return: bytes, the canonical json record {session_id, tag, payload}
    """
    verify(isinstance(flow, Flow) and flow.tag in FLOW_TAGS, "flow needs to be a Flow with a known tag")
    return _dumps(flow_record(params, session_id, flow))

_payload_fields = {ZERO: {"k", "qubits"}, ONE1: {"commitments"}, TWO1: {"indices", "commitments"},
                   ONE2: {"indices"}, TWO2: {"indices"}, ONE3: {"openings"}, TWO3: {"openings"},
                   THREE1: {"phi_hat"}, THREE2: {"phi"}, FOUR: {"j", "s"}, FIVE: {"hash"}}

def _decode_exponent(params, x):
    verify(stringish(x) and len(x) == 2 * params.group.exponent_bytes, "malformed exponent")
    rtn = int(x, 16)
    verify(rtn < params.group.q, "exponent out of range")
    return rtn

def _decode_commitments(params, lst):
    verify(isinstance(lst, list) and all(isinstance(_, list) and len(_) == 4 for _ in lst),
           "commitments need to be lists of 4 elements")
    g = params.group
    return [(Commitment(g.element_from_hex(a), g.element_from_hex(b)),
             Commitment(g.element_from_hex(c), g.element_from_hex(d))) for a, b, c, d in lst]

def _decode_openings(params, lst):
    verify(isinstance(lst, list), "openings need to be a list")
    rtn = []
    for pair in lst:
        verify(isinstance(pair, list) and len(pair) == 2, "openings come in pairs")
        ops = []
        for o in pair:
            verify(isinstance(o, list) and len(o) == 3 and o[0] in (0, 1) and not isinstance(o[0], bool),
                   "malformed opening")
            ops.append(Opening(o[0], _decode_exponent(params, o[1]), _decode_exponent(params, o[2])))
        rtn.append(tuple(ops))
    return rtn

def _decode_indices(lst):
    verify(isinstance(lst, list) and all(intish(_) for _ in lst), "indices need to be a list of integers")
    return list(lst)

def decode_flow(params, data):
    """
    Parse the bytes of one flow record.

    :return: (session_id, Flow). Raises QPakeError for anything malformed.
    """
    verify(isinstance(data, (bytes, bytearray)), "a flow record needs to be bytes")
    try:
        record = json.loads(bytes(data).decode("utf-8"))
    except (ValueError, UnicodeDecodeError):
        raise QPakeError("a flow record needs to be utf-8 json")
    verify(dictish(record) and set(record) == {"session_id", "tag", "payload"}, "malformed flow record")
    session_id, tag, p = record["session_id"], record["tag"], record["payload"]
    verify(stringish(session_id), "session_id needs to be a string")
    verify(tag in FLOW_TAGS, "unknown flow tag %s" % (tag,))
    verify(dictish(p) and set(p) == _payload_fields[tag], "malformed %s payload" % tag)
    try:
        if tag == ZERO:
            verify(intish(p["k"]) and p["k"] >= 1, "malformed qubit count")
            payload = {"register": qchannel.QuantumRegister.from_hex(p["qubits"], p["k"])}
        elif tag == ONE1:
            payload = {"commitments": _decode_commitments(params, p["commitments"])}
        elif tag == TWO1:
            payload = {"indices": _decode_indices(p["indices"]),
                       "commitments": _decode_commitments(params, p["commitments"])}
        elif tag in (ONE2, TWO2):
            payload = {"indices": _decode_indices(p["indices"])}
        elif tag in (ONE3, TWO3):
            payload = {"openings": _decode_openings(params, p["openings"])}
        elif tag == THREE1:
            payload = {"phi_hat": BitString.from_hex(p["phi_hat"], params.n)}
        elif tag == THREE2:
            payload = {"phi": BitString.from_hex(p["phi"], params.n)}
        elif tag == FOUR:
            verify(intish(p["j"]), "j needs to be an integer")
            payload = {"j": p["j"], "s": BitString.from_hex(p["s"], params.family.syndrome_len)}
        else:
            verify(dictish(p["hash"]), "malformed hash descriptor")
            payload = {"hash": UniversalHash.from_dict(p["hash"], params.ell, params.lam)}
    except (ValueError, TypeError, KeyError):
        raise QPakeError("malformed %s payload" % tag)
    return session_id, Flow(tag, payload)

# state machines

_client_script = ((None, "_send_zero"), (ONE1, "_on_one1"), (ONE3, "_on_one3"), (TWO2, "_on_two2"),
                  (THREE1, "_on_three1"), (None, "_send_four"), (FIVE, "_on_five"))
_server_script = ((ZERO, "_on_zero"), (ONE2, "_on_one2"), (TWO1, "_on_two1"), (TWO3, "_on_two3"),
                  (THREE2, "_on_three2"), (FOUR, "_on_four"))

class SessionState(object):
    """
    One party's protocol state. Create with new_session and drive with advance.
    Locals are only populated once the step defining them has run.
    """
    def __init__(self, params, role, pw, rng_seed, session_id):
        self.params, self.role, self.pw = params, role, pw
        self.rng_seed, self.session_id = rng_seed, session_id
        self.rng = make_rng(rng_seed)
        self.locals = {}
        self.outcome = PENDING
        self._script = _client_script if role == CLIENT else _server_script
        self._position = 0
        self.history = []
    @property
    def finished(self):
        return not self.outcome.is_pending
    @property
    def expected_tag(self):
        return self._script[self._position][0] if not self.finished else None
    @property
    def awaits_activation(self):
        return not self.finished and self.expected_tag is None
    @property
    def phase(self):
        if self.finished:
            return "finished"
        return "awaiting-activation" if self.expected_tag is None else "awaiting-%s" % self.expected_tag
    def _abort(self, reason):
        assert reason in ABORT_REASONS
        self.outcome = Outcome("abort", reason)
    def _finish(self, key_bits):
        self.outcome = Outcome("key", SessionKey(key_bits))
    def _code_word(self):
        return password_encode(self.params.dictionary, self.pw)
    def _valid_index_set(self, indices, allowed):
        return (len(indices) == self.params.test_size and indices == sorted(set(indices))
                and set(indices) <= set(allowed))
    def _test_round_passes(self, indices, x, x_hat, theta, theta_hat, key):
        idx = numpy.asarray(indices, dtype=numpy.int64)
        kept = idx[numpy.asarray(theta)[idx] == numpy.asarray(theta_hat)[idx]]
        rate = relative_hamming(_select(x, kept), _select(x_hat, kept))
        self.locals[key] = rate
        return rate <= self.params.tau / 2
    def _padded_block(self, bits):
        return _select(bits, self.locals["t_bar"]).restrict(self.locals["i_w"], self.params.ell)

    # client steps
    def _send_zero(self, payload):
        k = self.params.k
        x = self.rng.integers(0, 2, size=k, dtype=numpy.uint8)
        theta = self.rng.integers(0, 2, size=k, dtype=numpy.uint8)
        self.locals.update(x=x, theta=theta)
        return Flow(ZERO, {"register": qchannel.encode_bb84(x, theta, self.rng)})
    def _on_one1(self, payload):
        if len(payload["commitments"]) != self.params.k:
            return self._abort(MALFORMED_PAYLOAD)
        self.locals["server_commitments"] = payload["commitments"]
        t1 = sample_subset(self.rng, range(self.params.k), self.params.test_size)
        self.locals["t1"] = t1
        return Flow(ONE2, {"indices": t1})
    def _on_one3(self, payload):
        t1, openings = self.locals["t1"], payload["openings"]
        if len(openings) != len(t1):
            return self._abort(MALFORMED_PAYLOAD)
        ck, commitments = self.params.crs[0], self.locals["server_commitments"]
        for i, (ox, ot) in zip(t1, openings):
            if not (verify_open(ck, commitments[i][0], ox) and verify_open(ck, commitments[i][1], ot)):
                return self._abort(COMMITMENT_VERIFICATION)
        x_hat = numpy.zeros(self.params.k, dtype=numpy.uint8)
        theta_hat = numpy.zeros(self.params.k, dtype=numpy.uint8)
        x_hat[t1] = [ox.m for ox, _ in openings]
        theta_hat[t1] = [ot.m for _, ot in openings]
        if not self._test_round_passes(t1, self.locals["x"], x_hat, self.locals["theta"], theta_hat,
                                       "t1_error_rate"):
            return self._abort(ERROR_RATE)
        rest = sorted(set(range(self.params.k)) - set(t1))
        pairs, openings = _commit_pairs(self.params.crs[1], self.locals["x"][rest], self.locals["theta"][rest],
                                        self.rng)
        self.locals.update(rest=rest, client_openings=dict(zip(rest, openings)))
        return Flow(TWO1, {"indices": rest, "commitments": pairs})
    def _on_two2(self, payload):
        t2 = payload["indices"]
        if not self._valid_index_set(t2, self.locals["rest"]):
            return self._abort(MALFORMED_PAYLOAD)
        self.locals["t2"] = t2
        self.locals["t_bar"] = sorted(set(self.locals["rest"]) - set(t2))
        return Flow(TWO3, {"openings": [self.locals["client_openings"][i] for i in t2]})
    def _on_three1(self, payload):
        phi = _select(self.locals["theta"], self.locals["t_bar"]) ^ self._code_word()
        self.locals.update(phi=phi, phi_hat=payload["phi_hat"])
        self.locals["i_w"] = sift_indices(phi, payload["phi_hat"])
        return Flow(THREE2, {"phi": phi})
    def _send_four(self, payload):
        block = self._padded_block(self.locals["x"])
        j = random_below(self.rng, self.params.family.family_size)
        s = syndrome_compute(self.params.family, j, block)
        self.locals.update(block=block, j=j, s=s)
        return Flow(FOUR, {"j": j, "s": s})
    def _on_five(self, payload):
        f = payload["hash"]
        if (f.input_len, f.output_len) != (self.params.ell, self.params.lam):
            return self._abort(MALFORMED_PAYLOAD)
        self.locals["f"] = f
        self._finish(hash_eval(f, self.locals["block"]))

    # server steps
    def _on_zero(self, payload):
        register = payload["register"]
        if register.length != self.params.k:
            return self._abort(MALFORMED_PAYLOAD)
        theta_hat = self.rng.integers(0, 2, size=self.params.k, dtype=numpy.uint8)
        x_hat = qchannel.measure(register, theta_hat, self.rng)
        pairs, openings = _commit_pairs(self.params.crs[0], x_hat, theta_hat, self.rng)
        self.locals.update(x_hat=x_hat, theta_hat=theta_hat, server_openings=openings)
        return Flow(ONE1, {"commitments": pairs})
    def _on_one2(self, payload):
        t1 = payload["indices"]
        if not self._valid_index_set(t1, range(self.params.k)):
            return self._abort(MALFORMED_PAYLOAD)
        self.locals["t1"] = t1
        return Flow(ONE3, {"openings": [self.locals["server_openings"][i] for i in t1]})
    def _on_two1(self, payload):
        rest = sorted(set(range(self.params.k)) - set(self.locals["t1"]))
        if payload["indices"] != rest or len(payload["commitments"]) != len(rest):
            return self._abort(MALFORMED_PAYLOAD)
        self.locals["rest"] = rest
        self.locals["client_commitments"] = dict(zip(rest, payload["commitments"]))
        t2 = sample_subset(self.rng, rest, self.params.test_size)
        self.locals["t2"] = t2
        self.locals["t_bar"] = sorted(set(rest) - set(t2))
        return Flow(TWO2, {"indices": t2})
    def _on_two3(self, payload):
        t2, openings = self.locals["t2"], payload["openings"]
        if len(openings) != len(t2):
            return self._abort(MALFORMED_PAYLOAD)
        ck, commitments = self.params.crs[1], self.locals["client_commitments"]
        for i, (ox, ot) in zip(t2, openings):
            if not (verify_open(ck, commitments[i][0], ox) and verify_open(ck, commitments[i][1], ot)):
                return self._abort(COMMITMENT_VERIFICATION)
        x = numpy.zeros(self.params.k, dtype=numpy.uint8)
        theta = numpy.zeros(self.params.k, dtype=numpy.uint8)
        x[t2] = [ox.m for ox, _ in openings]
        theta[t2] = [ot.m for _, ot in openings]
        if not self._test_round_passes(t2, x, self.locals["x_hat"], theta, self.locals["theta_hat"],
                                       "t2_error_rate"):
            return self._abort(ERROR_RATE)
        phi_hat = _select(self.locals["theta_hat"], self.locals["t_bar"]) ^ self._code_word()
        self.locals["phi_hat"] = phi_hat
        return Flow(THREE1, {"phi_hat": phi_hat})
    def _on_three2(self, payload):
        self.locals["phi"] = payload["phi"]
        self.locals["i_w"] = sift_indices(payload["phi"], self.locals["phi_hat"])
    def _on_four(self, payload):
        family, j = self.params.family, payload["j"]
        if not 0 <= j < family.family_size:
            return self._abort(MALFORMED_PAYLOAD)
        x_hat = self._padded_block(self.locals["x_hat"])
        x_tilde = syndrome_decode(family, j, payload["s"], x_hat)
        within_radius = x_tilde is not None
        if not within_radius:
            # best block in the coset of s, possibly beyond the radius
            x_tilde = decode_candidate(family, j, payload["s"], x_hat)
        if x_tilde is None:
            return self._abort(DECODE_FAILURE)
        f = sample_two_universal(random_seed(self.rng), self.params.ell, self.params.lam)
        self.locals.update(j=j, s=payload["s"], x_tilde=x_tilde, f=f, within_radius=within_radius)
        self._finish(hash_eval(f, x_tilde))
        return Flow(FIVE, {"hash": f})

def new_session(params, role, pw, rng_seed, session_id=None):
    """
    Create a party's session.

    :param params: ProtocolParams

    :param role: CLIENT or SERVER

    :param pw: password index in [0, |D|)

    :param rng_seed: seed of the party's private random stream

    :param session_id: 16 hex digit session identifier shared by both parties

    :return: SessionState
    """
    verify(isinstance(params, ProtocolParams), "params needs to be a ProtocolParams")
    verify(role in (CLIENT, SERVER), "role needs to be CLIENT or SERVER")
    verify(intish(pw) and 0 <= pw < params.dictionary_size,
           "pw needs to be a password index in [0, %s)" % params.dictionary_size)
    verify_seed(rng_seed)
    session_id = session_id if session_id is not None else "%016x" % rng_seed
    verify(stringish(session_id), "session_id needs to be a string")
    return SessionState(params, role, int(pw), rng_seed, session_id)

def advance(state, incoming):
    """
    Run exactly one protocol step.

    :param state: SessionState, not finished

    :param incoming: a Flow, the bytes of a flow record, or None as an activation

    :return: (state, outgoing Flow or None, the Outcome reached by this step or None)
    """
    verify(isinstance(state, SessionState), "state needs to be a SessionState")
    verify(not state.finished, "the session has already finished")
    expected, handler = state._script[state._position]
    if isinstance(incoming, (bytes, bytearray)):
        try:
            session_id, incoming = decode_flow(state.params, incoming)
        except QPakeError:
            state._abort(MALFORMED_PAYLOAD)
            return state, None, state.outcome
        if session_id != state.session_id:
            state._abort(PROTOCOL_ERROR)
            return state, None, state.outcome
    if (incoming is not None and not isinstance(incoming, Flow)) or \
       (None if incoming is None else incoming.tag) != expected:
        state._abort(PROTOCOL_ERROR)
        return state, None, state.outcome
    state._position += 1
    state.history.append(expected or "activation")
    outgoing = getattr(state, handler)(None if incoming is None else incoming.payload)
    if state.outcome.is_abort:
        outgoing = None
    return state, outgoing, (None if state.outcome.is_pending else state.outcome)

# runner and transcripts

class Transcript(object):
    """
    Append-only record of one run: a header (seeds, passwords, parameter fingerprint), the flows in
    order, and the final outcomes.
    """
    def __init__(self, header):
        verify(dictish(header), "header needs to be a dict")
        self.header = dict(header)
        self._entries = []
        self.outcomes = {}
        self.observations = {}
    @property
    def entries(self):
        return tuple(self._entries)
    def append(self, entry):
        verify(dictish(entry), "entries need to be dicts")
        self._entries.append(dict(entry, step=len(self._entries) + 1))
    def tags(self):
        return [_["tag"] for _ in self._entries]
    def records(self):
        yield dict(self.header, record="header")
        for e in self._entries:
            yield dict(e, record="flow")
        yield {"record": "outcomes", "outcomes": self.outcomes,
               "observations": {k: str(v) for k, v in self.observations.items()}}
    def write_file(self, path):
        """
        write the transcript as json lines: header, one line per flow, outcomes
        """
        with open(path, "w") as f:
            for r in self.records():
                f.write(json.dumps(r, sort_keys=True) + "\n")
    def __eq__(self, other):
        return isinstance(other, Transcript) and list(self.records()) == list(other.records())

def read_transcript(path):
    with open(path, "r") as f:
        records = [json.loads(_) for _ in f if _.strip()]
    verify(records and records[0].get("record") == "header", "a transcript needs to start with a header")
    verify(records[-1].get("record") == "outcomes", "a transcript needs to end with the outcomes")
    header = {k: v for k, v in records[0].items() if k != "record"}
    rtn = Transcript(header)
    for r in records[1:-1]:
        verify(r.get("record") == "flow", "unexpected transcript record %s" % r.get("record"))
        rtn._entries.append({k: v for k, v in r.items() if k != "record"})
    rtn.outcomes = records[-1]["outcomes"]
    rtn.observations = {k: Fraction(v) for k, v in records[-1]["observations"].items()}
    return rtn

def session_seeds(seed):
    """
    :return: dict of the independent streams of one session, plus its session_id
    """
    client, server, channel, adversary, sid = spawn_seeds(seed, 5)
    return {"client": client, "server": server, "channel": channel, "adversary": adversary,
            "session_id": "%016x" % sid}

def new_transcript(params, pw_client, pw_server, channel, seed, compiled):
    seeds = session_seeds(verify_seed(seed))
    return Transcript({"session_id": seeds["session_id"], "seed": seed, "pw_client": pw_client,
                       "pw_server": pw_server, "channel": channel.describe(), "compiled": compiled,
                       "params_fingerprint": params.fingerprint(),
                       "seeds": {k: v for k, v in seeds.items() if k != "session_id"}})

def run_session(params, pw_client, pw_server, channel=None, classical_tamper=None, seed=0, sealer=None):
    """
    Drive a client and a server session to termination.

    :param params: ProtocolParams

    :param pw_client: the client's password index

    :param pw_server: the server's password index

    :param channel: qchannel.ChannelModel for flow Zero, ideal when None

    :param classical_tamper: optional callable(direction, tag, data) -> bytes or None (drop)

    :param seed: master seed; every random choice of the run derives from it

    :param sealer: optional object with seal(role, data) and open(role, data) (split authentication)

    :return: (client Outcome, server Outcome, Transcript)
    """
    channel = channel if channel is not None else qchannel.ideal()
    verify(isinstance(channel, qchannel.ChannelModel), "channel needs to be a ChannelModel")
    verify(classical_tamper is None or callable(classical_tamper), "classical_tamper needs to be callable")
    seeds = session_seeds(verify_seed(seed))
    sid = seeds["session_id"]
    transcript = new_transcript(params, pw_client, pw_server, channel, seed, sealer is not None)
    parties = {CLIENT: new_session(params, CLIENT, pw_client, seeds["client"], sid),
               SERVER: new_session(params, SERVER, pw_server, seeds["server"], sid)}
    channel_rng = make_rng(seeds["channel"])
    peer = {CLIENT: SERVER, SERVER: CLIENT}
    sender, incoming = CLIENT, None
    while True:
        _, out, _ = advance(parties[sender], incoming)
        if out is None:
            other = parties[peer[sender]]
            if not parties[sender].finished and other.awaits_activation:
                sender, incoming = peer[sender], None
                continue
            break
        receiver = peer[sender]
        sent = flow_record(params, sid, out)
        entry = {"direction": _directions[sender], "tag": out.tag, "sent": sent, "tampered": False,
                 "dropped": False}
        if out.tag == ZERO:
            delivered = Flow(ZERO, {"register": qchannel.apply_channel(out.payload["register"], channel,
                                                                       channel_rng)})
            entry["delivered"] = flow_record(params, sid, delivered)
            entry["tampered"] = entry["delivered"] != entry["sent"]
        else:
            plain = _dumps(sent)
            wire = sealer.seal(sender, plain) if sealer is not None else plain
            if classical_tamper is not None:
                tampered = classical_tamper(_directions[sender], out.tag, wire)
                entry["tampered"] = tampered != wire
                wire = tampered
            delivered = wire
            if wire is not None and sealer is not None:
                delivered = sealer.open(receiver, wire)
                if delivered is None:
                    parties[receiver]._abort(AUTHENTICATION)
            entry["dropped"] = wire is None
            entry["delivered"] = delivered.hex() if delivered is not None else None
        transcript.append(entry)
        if delivered is None:
            break
        sender, incoming = receiver, delivered
    for role, state in parties.items():
        if not state.finished:
            state._abort(TIMEOUT)
        transcript.outcomes[role] = state.outcome.to_dict()
        for key in ("t1_error_rate", "t2_error_rate"):
            if key in state.locals:
                transcript.observations[key] = state.locals[key]
    transcript.observations["i_w_size"] = len(parties[SERVER].locals.get("i_w", ()))
    return parties[CLIENT].outcome, parties[SERVER].outcome, transcript

def replay_transcript(params, transcript, channel=None, classical_tamper=None, runner=None):
    """
    Re-run a recorded session from its header and compare it flow by flow.

    :param runner: the session runner that produced the transcript (run_session when None)

    :return: True if every recorded flow and both outcomes are reproduced byte for byte
    """
    verify(isinstance(transcript, Transcript), "transcript needs to be a Transcript")
    h = transcript.header
    verify(h["params_fingerprint"] == params.fingerprint(), "the transcript was produced with other params")
    channel = channel if channel is not None else qchannel.ideal()
    verify(channel.describe() == h["channel"], "the transcript was produced over channel %s" % h["channel"])
    runner = runner or run_session
    verify(bool(h["compiled"]) == bool(getattr(runner, "compiled", False)),
           "replay needs a runner that matches the transcript's compiled flag")
    rerun = runner(params, h["pw_client"], h["pw_server"], channel, classical_tamper, h["seed"])[2]
    return list(rerun.records()) == list(transcript.records())
