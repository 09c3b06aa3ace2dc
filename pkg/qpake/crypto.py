"""
Dual-mode commitments over a prime-order subgroup of Z_p^*, and Schnorr signatures over the
same kind of group. Requires pycryptodome for group generation and primality checks.
PEP8
"""
import hashlib
from collections import namedtuple
from qpake.utils import freezable_factory, verify, intish, stringish, random_below, rng_randfunc
from qpake.utils import ModeError

try:
    from Crypto.Util import number
except:
    number = None

SIG_DOMAIN_TAG = b"qpake/sig/v1"
COMMIT_DOMAIN_TAG = b"qpake/commit/v1"

HIDING = "hiding"
BINDING = "binding"
_modes = (HIDING, BINDING)

class GroupParams(freezable_factory(object, "_isFrozen")):
    """
    The order q subgroup of Z_p^* generated by g.
    """
    def __init__(self, p, q, g):
        verify(all(map(intish, (p, q, g))), "p, q and g need to be integers")
        verify(p > 2 and q > 1 and (p - 1) % q == 0, "q needs to divide p - 1")
        verify(1 < g < p and pow(g, q, p) == 1, "g needs to generate a subgroup of order q")
        self.p, self.q, self.g = int(p), int(q), int(g)
        self.element_bytes = (self.p.bit_length() + 7) // 8
        self.exponent_bytes = (self.q.bit_length() + 7) // 8
        self._isFrozen = True
    def is_member(self, x):
        return intish(x) and 0 < x < self.p and pow(int(x), self.q, self.p) == 1
    def primes_check(self):
        """
        :return: True if both p and q pass pycryptodome's primality test
        """
        verify(number, "pycryptodome needs to be installed to check primality")
        return bool(number.isPrime(self.p) and number.isPrime(self.q))
    def element_to_bytes(self, x):
        return int(x).to_bytes(self.element_bytes, "big")
    def element_to_hex(self, x):
        return self.element_to_bytes(x).hex()
    def element_from_hex(self, hex_str):
        verify(stringish(hex_str) and len(hex_str) == 2 * self.element_bytes,
               "group elements need %s hex digits" % (2 * self.element_bytes))
        x = int(hex_str, 16)
        verify(self.is_member(x), "%s is not in the order q subgroup" % hex_str)
        return x
    def to_dict(self):
        return {"p": hex(self.p), "q": hex(self.q), "g": hex(self.g)}
    @classmethod
    def from_dict(cls, d):
        return cls(int(d["p"], 16), int(d["q"], 16), int(d["g"], 16))
    def __eq__(self, other):
        return isinstance(other, GroupParams) and (self.p, self.q, self.g) == (other.p, other.q, other.g)
    def __hash__(self):
        return hash((self.p, self.q, self.g))
    def __repr__(self):
        return "GroupParams(%s bit p)" % self.p.bit_length()

TOY_GROUP = GroupParams(23, 11, 2)

# 2048 bit safe prime of the SRP groups; 4 generates the quadratic residues
_rfc5054_2048 = int(
    "AC6BDB41324A9A9BF166DE5E1389582FAF72B6651987EE07FC3192943DB56050A37329CBB4"
    "A099ED8193E0757767A13DD52312AB4B03310DCD7F48A9DA04FD50E8083969EDB767B0CF60"
    "95179A163AB3661A05FBD5FAAAE82918A9962F0B93B855F97993EC975EEAA80D740ADBF4FF"
    "747359D041D5C33EA71D281E446B14773BCA97B43A23FB801676BD207A436C6481F1D2B907"
    "8717461A5B9D32E688F87748544523B524B0D57D5EA77A2775D2ECFA032CFBDBF52FB37861"
    "60279004E57AE6AF874E7303CE53299CCC041C7BC308D82A5698F3A8D0C38271AE35F8E9DB"
    "FBB694B5C803D89F7AE435DE236D525F54759B65E372FCD68EF20FA7111F9E4AFF73", 16)
MODP_2048 = GroupParams(_rfc5054_2048, (_rfc5054_2048 - 1) // 2, 4)

def generate_group(bits, rng):
    """
    Generate a safe-prime group p = 2q + 1 with g of order q.

    :param bits: bit length of p, at least 8

    :param rng: numpy Generator; the result is a deterministic function of its state

    :return: GroupParams
    """
    verify(number, "pycryptodome needs to be installed to generate groups")
    verify(intish(bits) and bits >= 8, "bits needs to be an integer of at least 8")
    randfunc = rng_randfunc(rng)
    while True:
        q = number.getPrime(bits - 1, randfunc=randfunc)
        p = 2 * q + 1
        if number.isPrime(p, randfunc=randfunc):
            break
    while True:
        g = pow(2 + random_below(rng, p - 3), 2, p)
        if g != 1:
            return GroupParams(p, q, g)

def random_exponent(params, rng, nonzero=False):
    while True:
        rtn = random_below(rng, params.q)
        if rtn or not nonzero:
            return rtn

def random_exponents(params, rng, count):
    """
    count uniform exponents in [0, q), drawing the raw bytes of a whole rejection pass at once
    """
    verify(intish(count) and count >= 0, "count needs to be a non-negative integer")
    nbytes = (params.q.bit_length() + 7) // 8
    mask = (1 << (params.q - 1).bit_length()) - 1
    rtn = []
    while len(rtn) < count:
        need = count - len(rtn)
        raw = rng.bytes(need * nbytes)
        candidates = (int.from_bytes(raw[i:i + nbytes], "big") & mask for i in range(0, len(raw), nbytes))
        rtn.extend(x for x in candidates if x < params.q)
    return rtn[:count]

Commitment = namedtuple("Commitment", ["c1", "c2"])
Opening = namedtuple("Opening", ["m", "r", "s"])
Trapdoor = namedtuple("Trapdoor", ["mode", "key", "alpha", "beta", "delta"])
SigKeyPair = namedtuple("SigKeyPair", ["sk", "vk"])

class CommitKey(freezable_factory(object, "_isFrozen")):
    """
    Public commitment key (g, h, u, v). Binding keys are DDH tuples, hiding keys are not.
    """
    def __init__(self, params, mode, g, h, u, v):
        verify(isinstance(params, GroupParams), "params needs to be a GroupParams")
        verify(mode in _modes, "mode needs to be one of %s" % (_modes,))
        verify(all(map(params.is_member, (g, h, u, v))), "key elements need to be subgroup members")
        self.params, self.mode = params, mode
        self.g, self.h, self.u, self.v = g, h, u, v
        self._isFrozen = True
    @property
    def elements(self):
        return self.g, self.h, self.u, self.v
    def to_dict(self):
        # no mode field, both modes share one format
        return {k: self.params.element_to_hex(x) for k, x in zip("ghuv", self.elements)}
    def fingerprint(self):
        data = COMMIT_DOMAIN_TAG + b"".join(map(self.params.element_to_bytes, self.elements))
        return hashlib.sha256(data).hexdigest()

def keygen(params, mode, rng, exponents=None):
    """
    Generate a commitment key and its trapdoor.

    :param params: GroupParams

    :param mode: HIDING or BINDING

    :param rng: numpy Generator

    :param exponents: optional fixed exponents, (alpha, beta) for BINDING and
                      (alpha, beta, delta) for HIDING

    :return: (CommitKey, Trapdoor). A BINDING trapdoor extracts, a HIDING trapdoor equivocates.
    """
    verify(isinstance(params, GroupParams), "params needs to be a GroupParams")
    verify(mode in _modes, "mode needs to be one of %s" % (_modes,))
    q, p, g = params.q, params.p, params.g
    if exponents is None:
        alpha, beta = random_exponent(params, rng, True), random_exponent(params, rng, True)
        delta = None
        if mode == HIDING:
            delta = random_exponent(params, rng)
            while delta == alpha * beta % q:
                delta = random_exponent(params, rng)
    else:
        verify(len(exponents) == (3 if mode == HIDING else 2), "wrong number of exponents for %s mode" % mode)
        verify(all(intish(_) and 0 < _ < q for _ in exponents[:2]), "alpha and beta need to be in [1, q)")
        alpha, beta = exponents[:2]
        delta = exponents[2] if mode == HIDING else None
        verify(delta is None or (intish(delta) and 0 <= delta < q), "delta needs to be in [0, q)")
        verify(delta is None or delta != alpha * beta % q, "a hiding key needs delta != alpha * beta")
    h, u = pow(g, alpha, p), pow(g, beta, p)
    v = pow(h, beta, p) if mode == BINDING else pow(g, delta, p)
    key = CommitKey(params, mode, g, h, u, v)
    if mode == BINDING:
        return key, Trapdoor(BINDING, key, None, beta, None)
    return key, Trapdoor(HIDING, key, alpha, beta, delta)

def _commit_with(ck, m, r, s):
    p = ck.params.p
    return Commitment(pow(ck.g, r, p) * pow(ck.h, s, p) % p,
                      pow(ck.u, r, p) * pow(ck.v, s, p) * pow(ck.g, m, p) % p)

def commit(ck, m, rng, randomness=None):
    """
    C = (g^r h^s, u^r v^s g^m)

    :param ck: CommitKey

    :param m: the bit being committed

    :param rng: numpy Generator used for (r, s)

    :param randomness: optional fixed (r, s)

    :return: (Commitment, Opening)
    """
    verify(isinstance(ck, CommitKey), "ck needs to be a CommitKey")
    verify(m in (0, 1), "only single bits can be committed")
    if randomness is None:
        r, s = random_exponent(ck.params, rng), random_exponent(ck.params, rng)
    else:
        r, s = randomness
        verify(all(intish(_) and 0 <= _ < ck.params.q for _ in (r, s)), "randomness needs to be in [0, q)")
    return _commit_with(ck, int(m), r, s), Opening(int(m), r, s)

def commit_bits(ck, bits, rng):
    """
    Commit to every bit of a sequence, with the randomness for all of them drawn in one pass.

    :return: (list of Commitment, list of Opening), in the order of bits
    """
    verify(isinstance(ck, CommitKey), "ck needs to be a CommitKey")
    bits = [int(_) for _ in bits]
    verify(all(m in (0, 1) for m in bits), "only single bits can be committed")
    randomness = random_exponents(ck.params, rng, 2 * len(bits))
    openings = [Opening(m, r, s) for m, r, s in zip(bits, randomness[0::2], randomness[1::2])]
    return [_commit_with(ck, *o) for o in openings], openings

def verify_open(ck, c, o):
    """
    :return: True if o opens c under ck, False otherwise (including for malformed input)
    """
    if not (isinstance(c, tuple) and len(c) == 2 and isinstance(o, tuple) and len(o) == 3):
        return False
    m, r, s = o
    q = ck.params.q
    if m not in (0, 1) or not all(intish(_) and 0 <= _ < q for _ in (r, s)):
        return False
    return tuple(_commit_with(ck, m, r, s)) == tuple(c)

def equivocate(tk, c, o1, m2):
    """
    Open c to m2 with a hiding-mode trapdoor, solving
    r2 + alpha s2 = r1 + alpha s1 and beta r2 + delta s2 = beta r1 + delta s1 + (m1 - m2) mod q.

    :return: Opening for m2
    """
    if tk.mode != HIDING:
        raise ModeError("equivocation needs a hiding mode trapdoor")
    verify(m2 in (0, 1), "m2 needs to be a bit")
    verify(verify_open(tk.key, c, o1), "o1 doesn't open c")
    if o1.m == m2:
        return o1
    q = tk.key.params.q
    alpha, beta, delta = tk.alpha, tk.beta, tk.delta
    a = (o1.r + alpha * o1.s) % q
    b = (beta * o1.r + delta * o1.s + o1.m - m2) % q
    s2 = (b - beta * a) * pow(delta - alpha * beta, -1, q) % q
    return Opening(m2, (a - alpha * s2) % q, s2)

def extract(xk, c):
    """
    :return: the m in {0, 1} with c2 g^-m = c1^beta, or None if neither bit fits
    """
    if xk.mode != BINDING:
        raise ModeError("extraction needs a binding mode trapdoor")
    params = xk.key.params
    p = params.p
    target = pow(c.c1, xk.beta, p)
    for m in (0, 1):
        if c.c2 * pow(params.g, -m, p) % p == target:
            return m
    return None

def sig_keygen(params, rng):
    sk = random_exponent(params, rng, True)
    return SigKeyPair(sk, pow(params.g, sk, params.p))

def _challenge(params, big_r, message):
    digest = hashlib.sha256(SIG_DOMAIN_TAG + params.element_to_bytes(big_r) + bytes(message)).digest()
    return int.from_bytes(digest, "big") % params.q

def sign(params, sk, message, rng):
    """
    Schnorr signature (e, s) with R = g^k, e = H(tag || R || message) mod q, s = k + e sk mod q.

    :return: bytes, e and s each encoded big-endian on the width of q
    """
    verify(isinstance(message, (bytes, bytearray)), "message needs to be bytes")
    verify(intish(sk) and 0 < sk < params.q, "sk needs to be in [1, q)")
    k = random_exponent(params, rng, True)
    e = _challenge(params, pow(params.g, k, params.p), message)
    s = (k + e * sk) % params.q
    return e.to_bytes(params.exponent_bytes, "big") + s.to_bytes(params.exponent_bytes, "big")

def verify_sig(params, vk, message, signature):
    """
    :return: True for a valid signature, False otherwise (including malformed encodings)
    """
    width = params.exponent_bytes
    if not isinstance(signature, (bytes, bytearray)) or len(signature) != 2 * width:
        return False
    if not isinstance(message, (bytes, bytearray)) or not params.is_member(vk):
        return False
    e, s = int.from_bytes(signature[:width], "big"), int.from_bytes(signature[width:], "big")
    if e >= params.q or s >= params.q:
        return False
    big_r = pow(params.g, s, params.p) * pow(vk, params.q - e, params.p) % params.p
    return _challenge(params, big_r, message) == e
