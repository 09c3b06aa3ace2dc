"""
GF(2) linear algebra: Toeplitz two-universal hashing, seed-indexed syndrome code families
with syndrome decoding, and the password code.
Requires numpy.
PEP8
"""
import math
from fractions import Fraction
from functools import lru_cache
import numpy
from qpake.utils import freezable_factory, verify, intish, numericish, stringish, containerish
from qpake.utils import make_rng, verify_seed

TABLE_DECODING_LIMIT = 20
BRUTE_FORCE_DICTIONARY_LIMIT = 4096
SPARSE_COLUMN_WEIGHT = 3
DEFAULT_FAMILY_SIZE = 65536

class BitString(freezable_factory(object, "_isFrozen")):
    """
    Immutable bit string of a declared length. Position 0 is the most significant bit,
    so the lexicographic order of equal length strings is the order of their integer values.
    """
    def __init__(self, value, length):
        verify(intish(length) and length >= 0, "length needs to be a non-negative integer")
        verify(intish(value) and value >= 0 and int(value).bit_length() <= length,
               "value doesn't fit in %s bits" % length)
        self._value = int(value)
        self._length = int(length)
        self._isFrozen = True
    @classmethod
    def zeros(cls, length):
        return cls(0, length)
    @classmethod
    def from_bits(cls, bits):
        """
        :param bits: a string of 0/1 characters, or a sequence (list, numpy array) of 0/1 entries

        :return: a BitString whose position i is bits[i]
        """
        if isinstance(bits, BitString):
            return bits
        if stringish(bits):
            verify(set(bits) <= {"0", "1"}, "bits needs to be a string of 0/1 characters")
            return cls(int(bits, 2) if bits else 0, len(bits))
        verify(containerish(bits), "bits needs to be a sequence")
        arr = numpy.asarray(bits if isinstance(bits, numpy.ndarray) else list(bits))
        verify(arr.ndim == 1 and ((arr == 0) | (arr == 1)).all(), "bits can only contain 0 and 1 entries")
        if not len(arr):
            return cls(0, 0)
        packed = numpy.packbits(arr.astype(numpy.uint8)).tobytes()
        return cls(int.from_bytes(packed, "big") >> (8 * len(packed) - len(arr)), len(arr))
    @classmethod
    def from_hex(cls, hex_str, length):
        verify(stringish(hex_str), "hex_str needs to be a string")
        verify(intish(length) and length >= 0, "length needs to be a non-negative integer")
        nbytes = (length + 7) // 8
        verify(len(hex_str) == 2 * nbytes, "hex_str has the wrong size for %s bits" % length)
        raw = int(hex_str, 16) if hex_str else 0
        pad = 8 * nbytes - length
        verify(raw & ((1 << pad) - 1) == 0, "non-zero padding bits in hex_str")
        return cls(raw >> pad, length)
    @property
    def value(self):
        return self._value
    def __len__(self):
        return self._length
    def __getitem__(self, i):
        verify(intish(i) and -self._length <= i < self._length, "bit index out of range")
        i = i % self._length
        return (self._value >> (self._length - 1 - i)) & 1
    def __iter__(self):
        for i in range(self._length):
            yield (self._value >> (self._length - 1 - i)) & 1
    def __contains__(self, item):
        return item in set(self)
    def bits(self):
        return list(self)
    def to_array(self):
        if not self._length:
            return numpy.zeros(0, dtype=numpy.uint8)
        nbytes = (self._length + 7) // 8
        raw = (self._value << (8 * nbytes - self._length)).to_bytes(nbytes, "big")
        return numpy.unpackbits(numpy.frombuffer(raw, dtype=numpy.uint8))[:self._length]
    def to_hex(self):
        """
        lowercase hex, MSB first, zero padded at the end to a whole number of bytes
        """
        nbytes = (self._length + 7) // 8
        return (self._value << (8 * nbytes - self._length)).to_bytes(nbytes, "big").hex()
    def weight(self):
        return bin(self._value).count("1")
    def _check_same_length(self, other):
        verify(isinstance(other, BitString), "can only combine a BitString with another BitString")
        verify(len(other) == self._length, "length mismatch %s vs %s" % (self._length, len(other)))
    def __xor__(self, other):
        self._check_same_length(other)
        return BitString(self._value ^ other._value, self._length)
    def __and__(self, other):
        self._check_same_length(other)
        return BitString(self._value & other._value, self._length)
    def __add__(self, other):
        verify(isinstance(other, BitString), "can only concatenate a BitString")
        return BitString((self._value << len(other)) | other._value, self._length + len(other))
    def __eq__(self, other):
        return isinstance(other, BitString) and (self._value, self._length) == (other._value, other._length)
    def __ne__(self, other):
        return not self.__eq__(other)
    def __hash__(self):
        return hash((self._value, self._length))
    def __lt__(self, other):
        self._check_same_length(other)
        return self._value < other._value
    def __str__(self):
        return format(self._value, "0%sb" % self._length) if self._length else ""
    def __repr__(self):
        return "BitString('%s')" % str(self)
    def restrict(self, indices, width=None):
        """
        x|_I as a fixed width block.

        :param indices: sorted positions to keep

        :param width: declared block width. Positions beyond width are dropped (highest indices
                      first) and a short restriction is padded with trailing zeros.

        :return: BitString of length width (len(indices) when width is None)
        """
        verify(containerish(indices), "indices needs to be a container")
        width = len(indices) if width is None else width
        verify(intish(width) and width >= 0, "width needs to be a non-negative integer")
        idx = numpy.asarray(list(indices)[:width], dtype=numpy.int64)
        verify(((idx >= 0) & (idx < self._length)).all(), "indices need to be positions of this BitString")
        rtn = numpy.zeros(width, dtype=numpy.uint8)
        rtn[:len(idx)] = self.to_array()[idx]
        return BitString.from_bits(rtn)

def as_bit_string(x):
    return x if isinstance(x, BitString) else BitString.from_bits(x)

def hamming_distance(a, b):
    a, b = as_bit_string(a), as_bit_string(b)
    verify(len(a) == len(b), "hamming distance needs equal lengths")
    return bin(a.value ^ b.value).count("1")

def parity(x):
    return bin(x).count("1") & 1

def matvec(rows, x):
    """
    GF(2) product of a matrix (one int per row, MSB first) with the column vector x.

    :return: BitString with one bit per row
    """
    rtn = 0
    for row in rows:
        rtn = (rtn << 1) | parity(row & x.value)
    return BitString(rtn, len(rows))

def gf2_rank(rows):
    pivots = {}
    for r in rows:
        while r:
            top = r.bit_length() - 1
            if top not in pivots:
                pivots[top] = r
                break
            r ^= pivots[top]
    return len(pivots)

def row_span(rows):
    span = {0}
    for r in rows:
        span |= {r ^ _ for _ in span}
    return span

def _reverse_bits(v, width):
    return int(format(v, "0%sb" % width)[::-1], 2) if width else 0

def _bits_to_int(arr):
    return BitString.from_bits(arr).value

class UniversalHash(freezable_factory(object, "_isFrozen")):
    """
    A member h(x) = T.x of the Toeplitz family, T[i][j] = diagonal[i - j + input_len - 1].
    """
    def __init__(self, diagonal, input_len, output_len, seed=None):
        verify(intish(input_len) and input_len >= 1, "input_len needs to be a positive integer")
        verify(intish(output_len) and output_len >= 1, "output_len needs to be a positive integer")
        verify(output_len <= input_len, "output_len can't exceed input_len")
        diagonal = as_bit_string(diagonal)
        verify(len(diagonal) == input_len + output_len - 1,
               "the diagonal needs input_len + output_len - 1 bits")
        self.input_len, self.output_len, self.seed = input_len, output_len, seed
        self.diagonal = diagonal
        full = input_len + output_len - 1
        mask = (1 << input_len) - 1
        self._rows = tuple(_reverse_bits((diagonal.value >> (full - i - input_len)) & mask, input_len)
                           for i in range(output_len))
        self._isFrozen = True
    @property
    def rows(self):
        return self._rows
    def to_dict(self):
        rtn = {"seed": self.seed, "input_len": self.input_len, "output_len": self.output_len}
        if self.seed is None:
            rtn["diagonal"] = self.diagonal.to_hex()
        return rtn
    @classmethod
    def from_dict(cls, d, input_len=None, output_len=None):
        """
        :param d: a to_dict record

        :param input_len: when given, the input length d has to declare (checked before any allocation)

        :param output_len: when given, the output length d has to declare
        """
        verify(set(d) in ({"seed", "input_len", "output_len"}, {"seed", "input_len", "output_len", "diagonal"}),
               "unexpected hash descriptor fields %s" % sorted(d))
        verify(intish(d["input_len"]) and intish(d["output_len"]), "hash lengths need to be integers")
        for name, expected in (("input_len", input_len), ("output_len", output_len)):
            verify(expected is None or d[name] == expected,
                   "hash descriptor declares %s %s, expected %s" % (name, d[name], expected))
        if d.get("seed") is not None:
            return sample_two_universal(d["seed"], d["input_len"], d["output_len"])
        return cls(BitString.from_hex(d["diagonal"], d["input_len"] + d["output_len"] - 1),
                   d["input_len"], d["output_len"])
    def __eq__(self, other):
        return isinstance(other, UniversalHash) and self._rows == other._rows and \
               (self.input_len, self.output_len) == (other.input_len, other.output_len)
    def __hash__(self):
        return hash(self._rows)

def sample_two_universal(seed, input_len, output_len):
    """
    Draw a member of the Toeplitz family from a seed.

    :param seed: integer in [0, 2**64)

    :param input_len: l, the block length

    :param output_len: the key length, at most input_len

    :return: UniversalHash, a deterministic function of the arguments
    """
    verify(intish(output_len) and intish(input_len) and output_len <= input_len,
           "output_len can't exceed input_len")
    verify(output_len >= 1, "output_len needs to be positive")
    rng = make_rng(verify_seed(seed))
    diagonal = BitString.from_bits(rng.integers(0, 2, size=input_len + output_len - 1, dtype=numpy.uint8))
    return UniversalHash(diagonal, input_len, output_len, seed)

def all_two_universal(input_len, output_len):
    full = input_len + output_len - 1
    for d in range(2 ** full):
        yield UniversalHash(BitString(d, full), input_len, output_len)

def hash_eval(h, x):
    verify(isinstance(h, UniversalHash), "h needs to be a UniversalHash")
    x = as_bit_string(x)
    verify(len(x) == h.input_len, "x has %s bits, the hash expects %s" % (len(x), h.input_len))
    return matvec(h.rows, x)

def _flat_source_distance(outputs, output_len):
    counts = {}
    for y in outputs:
        counts[y] = counts.get(y, 0) + 1
    total = sum(counts.values())
    uniform = Fraction(1, 2 ** output_len)
    missing = 2 ** output_len - len(counts)
    return (sum(abs(Fraction(c, total) - uniform) for c in counts.values()) + missing * uniform) / 2

def exact_hash_distance(support, input_len, output_len):
    """
    Statistical distance of (h, h(X)) from (h, uniform) for X flat on support, averaged exactly
    over the whole Toeplitz family.

    :return: Fraction
    """
    support = [as_bit_string(BitString(_, input_len) if intish(_) else _) for _ in support]
    verify(support and len(set(support)) == len(support), "support needs distinct elements")
    verify(all(len(_) == input_len for _ in support), "support elements need input_len bits")
    total, members = Fraction(0), 0
    for h in all_two_universal(input_len, output_len):
        total += _flat_source_distance([matvec(h.rows, x).value for x in support], output_len)
        members += 1
    return total / members

@lru_cache(maxsize=4096)
def _sampled_rows(seed, j, block_len, syndrome_len):
    rng = make_rng(seed, j)
    while True:
        rows = tuple(_bits_to_int(rng.integers(0, 2, size=block_len, dtype=numpy.uint8))
                     for _ in range(syndrome_len))
        if gf2_rank(rows) == syndrome_len:
            return rows

@lru_cache(maxsize=64)
def _sampled_sparse_matrix(seed, j, block_len, syndrome_len):
    rng = make_rng(seed, j)
    rtn = numpy.zeros((syndrome_len, block_len), dtype=numpy.int64)
    weight = min(SPARSE_COLUMN_WEIGHT, syndrome_len)
    # each column gets weight distinct rows
    picks = rng.random((block_len, syndrome_len)).argsort(axis=1)[:, :weight]
    rtn[picks, numpy.arange(block_len)[:, None]] = 1
    rtn.setflags(write=False)
    return rtn

def _array_parity(v):
    for shift in (32, 16, 8, 4, 2, 1):
        v = v ^ (v >> shift)
    return v & 1

@lru_cache(maxsize=32)
def _coset_leaders(rows, block_len):
    xs = numpy.arange(2 ** block_len, dtype=numpy.int64)
    syn = numpy.zeros_like(xs)
    for row in rows:
        syn = (syn << 1) | _array_parity(xs & row)
    weights = numpy.zeros_like(xs)
    for b in range(block_len):
        weights += (xs >> b) & 1
    order = numpy.lexsort((xs, weights))
    uniq, first = numpy.unique(syn[order], return_index=True)
    rtn = numpy.full(2 ** len(rows), -1, dtype=numpy.int64)
    rtn[uniq] = xs[order][first]
    rtn.setflags(write=False)
    return rtn

class SyndromeFamily(freezable_factory(object, "_isFrozen")):
    """
    A seed-indexed family {synd_j : j in J} of parity-check maps on block_len bits.
    Blocks of at most TABLE_DECODING_LIMIT bits use dense random full-rank check matrices
    with coset-leader decoding. Longer blocks use sparse check matrices (column weight 3)
    with bit-flip decoding. Both are bounded by radius = floor(tau * block_len).
    """
    def __init__(self, block_len, syndrome_len=None, tau=0.1, beta=0.5, family_size=DEFAULT_FAMILY_SIZE,
                 seed=0, matrices=None):
        """
        :param block_len: l

        :param syndrome_len: l minus the code dimension, defaults to ceil(l/2)

        :param tau: correctable error fraction

        :param beta: bias rate, the declared bias is 2**(-beta*l/2)

        :param family_size: |J|

        :param seed: family seed; member j is drawn from the (seed, j) sub-stream

        :param matrices: optional explicit list of check matrices (each a list of 0/1 strings or
                         row ints). Overrides seed, family_size and syndrome_len.
        """
        verify(intish(block_len) and block_len >= 1, "block_len needs to be a positive integer")
        verify(numericish(tau) and 0 <= tau < 0.5, "tau needs to be in [0, 1/2)")
        verify(numericish(beta) and beta > 0, "beta needs to be positive")
        self.block_len, self.tau, self.beta = block_len, tau, beta
        self.seed = verify_seed(seed)
        if matrices is not None:
            verify(containerish(matrices) and len(matrices) >= 1, "matrices needs to be a non-empty list")
            self._matrices = tuple(tuple(as_bit_string(r).value if not intish(r) else int(r) for r in m)
                                   for m in matrices)
            verify(len({len(m) for m in self._matrices}) == 1, "explicit matrices need equal row counts")
            verify(all(0 <= r < 2 ** block_len for m in self._matrices for r in m),
                   "explicit matrix rows need block_len bits")
            syndrome_len, family_size = len(self._matrices[0]), len(self._matrices)
        else:
            self._matrices = None
        syndrome_len = (block_len + 1) // 2 if syndrome_len is None else syndrome_len
        verify(intish(syndrome_len) and 1 <= syndrome_len <= block_len,
               "syndrome_len needs to be in [1, block_len]")
        verify(matrices is not None or syndrome_len >= SPARSE_COLUMN_WEIGHT or block_len <= TABLE_DECODING_LIMIT,
               "sparse check matrices need at least %s rows" % SPARSE_COLUMN_WEIGHT)
        verify(intish(family_size) and family_size >= 1, "family_size needs to be a positive integer")
        self.syndrome_len, self.family_size = syndrome_len, family_size
        self.delta_bound = 2.0 ** (-beta * block_len / 2)
        self.radius = int(math.floor(tau * block_len))
        self._isFrozen = True
    @property
    def table_regime(self):
        return self.block_len <= TABLE_DECODING_LIMIT
    @property
    def index_set(self):
        return range(self.family_size)
    def _verify_index(self, j):
        verify(intish(j) and 0 <= j < self.family_size, "unknown syndrome family index %s" % (j,))
    def check_rows(self, j):
        """
        :return: the rows of H_j as ints, MSB first
        """
        self._verify_index(j)
        if self._matrices is not None:
            return self._matrices[j]
        if self.table_regime:
            return _sampled_rows(self.seed, int(j), self.block_len, self.syndrome_len)
        return tuple(_bits_to_int(r) for r in _sampled_sparse_matrix(self.seed, int(j), self.block_len,
                                                                     self.syndrome_len))
    def parity_check_matrix(self, j):
        self._verify_index(j)
        if self._matrices is None and not self.table_regime:
            return _sampled_sparse_matrix(self.seed, int(j), self.block_len, self.syndrome_len)
        return numpy.array([BitString(r, self.block_len).to_array() for r in self.check_rows(j)],
                           dtype=numpy.int64)
    def to_dict(self):
        verify(self._matrices is None, "families built from explicit matrices don't serialize")
        return {"seed": self.seed, "block_len": self.block_len, "syndrome_len": self.syndrome_len,
                "family_size": self.family_size, "tau": self.tau, "beta": self.beta}
    @classmethod
    def from_dict(cls, d):
        return cls(d["block_len"], d["syndrome_len"], d["tau"], d["beta"], d["family_size"], d["seed"])

def syndrome_compute(family, j, x):
    """
    s = H_j . x over GF(2)

    :return: BitString of family.syndrome_len bits
    """
    verify(isinstance(family, SyndromeFamily), "family needs to be a SyndromeFamily")
    x = as_bit_string(x)
    verify(len(x) == family.block_len, "x has %s bits, the family expects %s" % (len(x), family.block_len))
    if family._matrices is not None or family.table_regime:
        return matvec(family.check_rows(j), x)
    h = family.parity_check_matrix(j)
    return BitString.from_bits(h.dot(x.to_array().astype(numpy.int64)) & 1)

def _bit_flip_decode(family, j, s, x_hat, max_iterations):
    # None unless the iterate reaches syndrome s, however far it moved
    h = family.parity_check_matrix(j)
    target = s.to_array().astype(numpy.int64)
    x = x_hat.to_array().astype(numpy.int64)
    for _ in range(max_iterations):
        unsatisfied = (h.dot(x) + target) & 1
        if not unsatisfied.any():
            return BitString.from_bits(x)
        counts = unsatisfied.dot(h)
        x[counts == counts.max()] ^= 1
    return BitString.from_bits(x) if not ((h.dot(x) + target) & 1).any() else None

def _coset_leader_decode(family, j, s, x_hat):
    leaders = _coset_leaders(family.check_rows(j), family.block_len)
    e = int(leaders[(s ^ syndrome_compute(family, j, x_hat)).value])
    return None if e < 0 else x_hat ^ BitString(e, family.block_len)

def solve_syndrome(h, target):
    """
    One solution e of h . e = target over GF(2), free positions set to zero.

    :param h: 0/1 numpy matrix

    :param target: 0/1 numpy vector with one entry per row of h

    :return: numpy uint8 vector, or None when target is outside the column space of h
    """
    rows, cols = h.shape
    a = numpy.concatenate([numpy.asarray(h, dtype=numpy.uint8) & 1,
                           (numpy.asarray(target, dtype=numpy.uint8) & 1)[:, None]], axis=1)
    pivots = []
    for c in range(cols):
        r = len(pivots)
        if r == rows:
            break
        hits = numpy.nonzero(a[r:, c])[0]
        if not len(hits):
            continue
        p = r + int(hits[0])
        a[[r, p]] = a[[p, r]]
        others = numpy.nonzero(a[:, c])[0]
        a[others[others != r]] ^= a[r]
        pivots.append(c)
    if a[len(pivots):, -1].any():
        return None
    rtn = numpy.zeros(cols, dtype=numpy.uint8)
    rtn[pivots] = a[:len(pivots), -1]
    return rtn

def _check_decode_args(family, s, x_hat):
    verify(isinstance(family, SyndromeFamily), "family needs to be a SyndromeFamily")
    s, x_hat = as_bit_string(s), as_bit_string(x_hat)
    verify(len(s) == family.syndrome_len, "s needs %s bits" % family.syndrome_len)
    verify(len(x_hat) == family.block_len, "x_hat needs %s bits" % family.block_len)
    return s, x_hat

def syndrome_decode(family, j, s, x_hat, max_iterations=100):
    """
    Find x with synd_j(x) = s closest to x_hat, within the decoding radius.

    :param family: SyndromeFamily

    :param j: family index

    :param s: target syndrome

    :param x_hat: the noisy block

    :param max_iterations: bit-flip iteration cap (long blocks only)

    :return: the decoded BitString, or None when decoding fails. Short blocks look up the minimum
             weight, lexicographically smallest error pattern; long blocks use bit flipping.
             Either way the result is None when it lies more than family.radius from x_hat.
    """
    s, x_hat = _check_decode_args(family, s, x_hat)
    if family.table_regime:
        rtn = _coset_leader_decode(family, j, s, x_hat)
    else:
        rtn = _bit_flip_decode(family, j, s, x_hat, max_iterations)
    if rtn is None or hamming_distance(rtn, x_hat) > family.radius:
        return None
    return rtn

def decode_candidate(family, j, s, x_hat, max_iterations=100):
    """
    Complete decoding: a block with syndrome s, preferring the one syndrome_decode would return.
    Beyond the radius, short blocks take the coset leader and long blocks take the converged
    bit-flip iterate, or else x_hat corrected by a particular solution of H_j e = s + H_j x_hat.

    :return: BitString, or None only when no block at all has syndrome s
    """
    s, x_hat = _check_decode_args(family, s, x_hat)
    if family.table_regime:
        return _coset_leader_decode(family, j, s, x_hat)
    rtn = _bit_flip_decode(family, j, s, x_hat, max_iterations)
    if rtn is not None:
        return rtn
    e = solve_syndrome(family.parity_check_matrix(j), (s ^ syndrome_compute(family, j, x_hat)).to_array())
    return None if e is None else x_hat ^ BitString.from_bits(e)

def bias_squared(family, indices=None):
    """
    max over non-zero a of Pr_j[a lies in the row space of H_j], exactly.
    The square root is the empirical bias of the family.
    """
    verify(family.table_regime, "bias can only be measured for blocks of at most %s bits" %
           TABLE_DECODING_LIMIT)
    indices = list(family.index_set if indices is None else indices)
    verify(indices, "at least one index is needed")
    hits = numpy.zeros(2 ** family.block_len, dtype=numpy.int64)
    for j in indices:
        hits[sorted(row_span(family.check_rows(j)))] += 1
    hits[0] = 0
    return Fraction(int(hits.max()), len(indices))

def empirical_bias(family, indices=None):
    return math.sqrt(bias_squared(family, indices))

def exact_syndrome_distance(family, support, indices=None):
    """
    Statistical distance of (J, synd_J(X)) from (J, uniform) for X flat on support,
    J uniform over indices.

    :return: Fraction
    """
    indices = list(family.index_set if indices is None else indices)
    verify(indices, "at least one index is needed")
    support = [BitString(_, family.block_len) if intish(_) else as_bit_string(_) for _ in support]
    verify(support and len(set(support)) == len(support), "support needs distinct elements")
    total = sum(_flat_source_distance([syndrome_compute(family, j, x).value for x in support],
                                      family.syndrome_len) for j in indices)
    return Fraction(total) / len(indices)

_POPCOUNT = numpy.unpackbits(numpy.arange(256, dtype=numpy.uint8)[:, None], axis=1).sum(axis=1)

def _pairwise_min_distance(codewords):
    size, n = codewords.shape
    if size < 2:
        return n
    packed = numpy.packbits(codewords, axis=1)
    chunk = max(1, 2 ** 22 // (size * packed.shape[1]))
    rtn = n
    for start in range(0, size - 1, chunk):
        stop = min(size, start + chunk)
        dists = _POPCOUNT[packed[start:stop, None, :] ^ packed[None, :, :]].sum(axis=2)
        upper = numpy.arange(size)[None, :] > numpy.arange(start, stop)[:, None]
        rtn = min(rtn, int(dists[upper].min()))
    return rtn

def _required_distance(gamma, n):
    # distinct passwords always need distinct codewords
    return max(1, int(math.ceil(gamma * n - 1e-9)))

class PasswordCode(freezable_factory(object, "_isFrozen")):
    """
    The password code c: a map from password index to a basis string of codeword_len bases
    (0 for PLUS, 1 for TIMES). Use sample_password_code or PasswordCode.from_table.
    """
    def __init__(self, codewords, gamma, seed=None):
        codewords = numpy.asarray(codewords, dtype=numpy.uint8)
        verify(codewords.ndim == 2 and codewords.shape[0] >= 1 and codewords.shape[1] >= 1,
               "codewords needs to be a non-empty matrix")
        verify(numericish(gamma) and 0 <= gamma <= 1, "gamma needs to be in [0, 1]")
        self.dictionary_size, self.codeword_len = codewords.shape
        self.gamma, self.seed = gamma, seed
        self.required_distance = _required_distance(gamma, self.codeword_len)
        self.distance_verified = self.dictionary_size <= BRUTE_FORCE_DICTIONARY_LIMIT
        if self.distance_verified:
            self.min_distance = _pairwise_min_distance(codewords)
            verify(self.min_distance >= self.required_distance,
                   "code distance %s is below gamma * n = %s" % (self.min_distance, self.required_distance))
        else:
            self.min_distance = self.required_distance
        self._table = tuple(BitString.from_bits(row) for row in codewords)
        self._isFrozen = True
    @classmethod
    def from_table(cls, table, gamma):
        """
        :param table: list of codewords, each a 0/1 string, BitString or bit sequence ("+"/"x" allowed)

        :param gamma: declared distance rate
        """
        verify(containerish(table) and len(table), "table needs to be a non-empty list")
        rows = [as_bit_string(_.replace("+", "0").replace("x", "1") if stringish(_) else _) for _ in table]
        verify(len({len(_) for _ in rows}) == 1, "codewords need equal lengths")
        return cls([_.to_array() for _ in rows], gamma)
    @property
    def table(self):
        return self._table
    def to_dict(self):
        verify(self.seed is not None, "codes built from explicit tables don't serialize to a seed record")
        return {"seed": self.seed, "dictionary_size": self.dictionary_size,
                "codeword_len": self.codeword_len, "gamma": self.gamma}

def sample_password_code(dictionary_size, codeword_len, gamma, seed, max_attempts=1000):
    """
    Sample a random binary linear code of dimension ceil(log2 |D|), keep the first |D| codewords,
    and resample until the minimum distance reaches gamma * n (checked exactly for |D| <= 4096).

    :return: PasswordCode
    """
    verify(intish(dictionary_size) and dictionary_size >= 1, "dictionary_size needs to be a positive integer")
    verify(intish(codeword_len) and codeword_len >= 1, "codeword_len needs to be a positive integer")
    verify(numericish(gamma) and 0 <= gamma <= 1, "gamma needs to be in [0, 1]")
    if dictionary_size == 1:
        return PasswordCode(numpy.zeros((1, codeword_len), dtype=numpy.uint8), gamma, seed)
    dimension = max(1, (dictionary_size - 1).bit_length())
    messages = (numpy.arange(dictionary_size)[:, None] >> numpy.arange(dimension)[None, :]) & 1
    required = _required_distance(gamma, codeword_len)
    rng = make_rng(verify_seed(seed))
    for _ in range(max_attempts):
        generator = rng.integers(0, 2, size=(dimension, codeword_len), dtype=numpy.int64)
        codewords = (messages.dot(generator) & 1).astype(numpy.uint8)
        if dictionary_size > BRUTE_FORCE_DICTIONARY_LIMIT or _pairwise_min_distance(codewords) >= required:
            return PasswordCode(codewords, gamma, seed)
    verify(False, "no code of length %s with distance %s for %s passwords found in %s attempts" %
           (codeword_len, required, dictionary_size, max_attempts))

def password_encode(code, pw):
    verify(isinstance(code, PasswordCode), "code needs to be a PasswordCode")
    verify(intish(pw) and 0 <= pw < code.dictionary_size,
           "pw needs to be a password index in [0, %s)" % code.dictionary_size)
    return code.table[pw]

def verify_min_distance(code):
    """
    Exact pairwise minimum distance of the code; n by convention for a single password.
    """
    verify(isinstance(code, PasswordCode), "code needs to be a PasswordCode")
    verify(code.dictionary_size <= BRUTE_FORCE_DICTIONARY_LIMIT,
           "minimum distance checks are unsupported above %s passwords" % BRUTE_FORCE_DICTIONARY_LIMIT)
    return _pairwise_min_distance(numpy.array([_.to_array() for _ in code.table], dtype=numpy.uint8))
