import itertools
import unittest
from fractions import Fraction
import numpy
import qpake.gf2 as gf2
from qpake.gf2 import BitString, SyndromeFamily, UniversalHash
from qpake.utils import make_rng
from qpake.testing.qpaketestutils import firesException

_hamming_7 = ["0001111", "0110011", "1010101"]

def _nearest_coset_member(family, j, s, x_hat):
    # brute force oracle: minimum weight error, smallest integer among ties
    target = s ^ gf2.syndrome_compute(family, j, x_hat)
    best = min((BitString(e, family.block_len) for e in range(2 ** family.block_len)
                if gf2.syndrome_compute(family, j, BitString(e, family.block_len)) == target),
               key=lambda e: (e.weight(), e.value))
    return x_hat ^ best

class TestBitString(unittest.TestCase):
    def testBasics(self):
        x = BitString.from_bits("1011")
        self.assertTrue(len(x) == 4 and x.value == 11 and x.bits() == [1, 0, 1, 1])
        self.assertTrue(x[0] == 1 and x[1] == 0 and x[-1] == 1)
        self.assertTrue(str(x) == "1011" and x.weight() == 3)
        self.assertTrue(x ^ BitString.from_bits("1111") == BitString.from_bits("0100"))
        self.assertTrue(x + BitString.from_bits("01") == BitString.from_bits("101101"))
        self.assertTrue(BitString.from_bits([1, 0, 1, 1]) == x == BitString.from_bits(numpy.array([1, 0, 1, 1])))
        self.assertTrue(BitString.from_bits("0011") < x)
        self.assertTrue(firesException(lambda: x ^ BitString.from_bits("101")))
        self.assertTrue(firesException(lambda: BitString(16, 4)))
        self.assertTrue(firesException(lambda: BitString.from_bits("10a")))
        self.assertTrue(len(BitString.from_bits("")) == 0)

    def testWeights(self):
        wide = BitString((1 << 100) - 1, 100)
        self.assertTrue(wide.weight() == 100 and BitString.zeros(9).weight() == 0)
        self.assertTrue(gf2.hamming_distance(wide, BitString(1 << 99, 100)) == 99)
        self.assertTrue(gf2.hamming_distance("0110", "0101") == 2)
        self.assertTrue(gf2.parity(0b1011) == 1 and gf2.parity(0) == 0 and gf2.parity((1 << 70) + 1) == 0)

    def testHex(self):
        self.assertTrue(BitString.from_bits("1011").to_hex() == "b0")
        self.assertTrue(BitString.from_bits("101100001").to_hex() == "b080")
        self.assertTrue(BitString.from_hex("b080", 9) == BitString.from_bits("101100001"))
        self.assertTrue(firesException(lambda: BitString.from_hex("b1", 4)))
        self.assertTrue(firesException(lambda: BitString.from_hex("b0", 9)))
        rng = make_rng(1)
        for k in (1, 7, 8, 9, 64, 65):
            x = BitString.from_bits(rng.integers(0, 2, k))
            self.assertTrue(BitString.from_hex(x.to_hex(), k) == x)
            self.assertTrue((x.to_array() == numpy.array(x.bits())).all())

    def testRestrict(self):
        x = BitString.from_bits("110101")
        self.assertTrue(x.restrict([0, 2, 3]) == BitString.from_bits("101"))
        self.assertTrue(x.restrict([0, 2, 3], 5) == BitString.from_bits("10100"))
        self.assertTrue(x.restrict([0, 1, 2, 3, 5], 3) == BitString.from_bits("110"))
        self.assertTrue(x.restrict([], 2) == BitString.zeros(2))

class TestHashing(unittest.TestCase):
    def testToeplitzByHand(self):
        h = UniversalHash(BitString.from_bits("10110"), 4, 2)
        self.assertTrue([BitString(r, 4) for r in h.rows] == [BitString.from_bits("1101"),
                                                               BitString.from_bits("0110")])
        self.assertTrue(gf2.hash_eval(h, "1010") == BitString.from_bits("11"))
        self.assertTrue(gf2.hash_eval(h, "0000") == BitString.from_bits("00"))

    def testSampleDeterministic(self):
        self.assertTrue(gf2.sample_two_universal(5, 32, 8) == gf2.sample_two_universal(5, 32, 8))
        self.assertTrue(gf2.sample_two_universal(5, 32, 8) != gf2.sample_two_universal(6, 32, 8))
        h = gf2.sample_two_universal(5, 32, 8)
        self.assertTrue(UniversalHash.from_dict(h.to_dict()) == h)
        self.assertTrue(UniversalHash.from_dict(h.to_dict(), 32, 8) == h)
        self.assertTrue(firesException(lambda: gf2.sample_two_universal(5, 4, 8)))

    def testDescriptorLengths(self):
        h = gf2.sample_two_universal(5, 32, 8)
        huge = dict(h.to_dict(), input_len=2 ** 40)
        self.assertTrue(firesException(lambda: UniversalHash.from_dict(huge, 32, 8)))
        self.assertTrue(firesException(lambda: UniversalHash.from_dict(h.to_dict(), 32, 4)))
        self.assertTrue(firesException(lambda: UniversalHash.from_dict(dict(h.to_dict(), output_len="8"))))
        explicit = UniversalHash(BitString.from_bits("10110"), 4, 2)
        self.assertTrue(UniversalHash.from_dict(explicit.to_dict(), 4, 2) == explicit)
        self.assertTrue(firesException(lambda: UniversalHash.from_dict(explicit.to_dict(), 5, 2)))

    def testLinearity(self):
        rng = make_rng(2)
        for i in range(2000):
            h = gf2.sample_two_universal(i, 24, 6)
            x, y = (BitString.from_bits(rng.integers(0, 2, 24)) for _ in range(2))
            self.assertTrue(gf2.hash_eval(h, x ^ y) == gf2.hash_eval(h, x) ^ gf2.hash_eval(h, y))
            self.assertTrue(gf2.hash_eval(h, BitString.zeros(24)) == BitString.zeros(6))

    def testCollisionProbability(self):
        members = list(gf2.all_two_universal(8, 3))
        self.assertTrue(len(members) == 2 ** 10)
        rng = make_rng(3)
        for _ in range(10):
            x, y = rng.choice(256, size=2, replace=False)
            x, y = BitString(int(x), 8), BitString(int(y), 8)
            collisions = sum(gf2.hash_eval(h, x) == gf2.hash_eval(h, y) for h in members)
            self.assertTrue(Fraction(collisions, len(members)) <= Fraction(1, 8))

    def testLeftoverHash(self):
        rng = make_rng(4)
        for t in (4, 6, 8):
            support = sorted(int(_) for _ in rng.choice(256, size=2 ** t, replace=False))
            distance = gf2.exact_hash_distance(support, 8, 2)
            self.assertTrue(isinstance(distance, Fraction))
            self.assertTrue(distance ** 2 <= Fraction(1, 2 ** (t - 2)))

class TestSyndromes(unittest.TestCase):
    def testParityExample(self):
        family = SyndromeFamily(3, matrices=[["111"]])
        self.assertTrue(gf2.syndrome_compute(family, 0, "101") == BitString.from_bits("0"))
        self.assertTrue(gf2.syndrome_compute(family, 0, "100") == BitString.from_bits("1"))

    def testCodewordsAreTheKernel(self):
        for ell in (6, 9, 12):
            family = SyndromeFamily(ell, family_size=4, seed=ell)
            for j in family.index_set:
                rank = gf2.gf2_rank(family.check_rows(j))
                self.assertTrue(rank == family.syndrome_len)
                kernel = [x for x in range(2 ** ell)
                          if gf2.syndrome_compute(family, j, BitString(x, ell)).value == 0]
                self.assertTrue(len(kernel) == 2 ** (ell - rank))
                self.assertTrue(all(a ^ b in set(kernel) for a, b in zip(kernel, kernel[1:])))

    def testLinearity(self):
        family = SyndromeFamily(40, family_size=8, seed=3)
        self.assertFalse(family.table_regime)
        rng = make_rng(5)
        for j in family.index_set:
            x, e = (BitString.from_bits(rng.integers(0, 2, 40)) for _ in range(2))
            self.assertTrue(gf2.syndrome_compute(family, j, x ^ e) ==
                            gf2.syndrome_compute(family, j, x) ^ gf2.syndrome_compute(family, j, e))

    def testDecodeZeroError(self):
        rng = make_rng(6)
        for ell in (8, 40):
            family = SyndromeFamily(ell, family_size=8, seed=1)
            for j in family.index_set:
                x = BitString.from_bits(rng.integers(0, 2, ell))
                self.assertTrue(gf2.syndrome_decode(family, j, gf2.syndrome_compute(family, j, x), x) == x)

    def testHammingSingleErrors(self):
        family = SyndromeFamily(7, tau=0.15, matrices=[_hamming_7])
        self.assertTrue(family.radius == 1)
        rng = make_rng(7)
        for _ in range(5):
            x = BitString.from_bits(rng.integers(0, 2, 7))
            s = gf2.syndrome_compute(family, 0, x)
            for i in range(7):
                x_hat = x ^ BitString(1 << (6 - i), 7)
                self.assertTrue(gf2.syndrome_decode(family, 0, s, x_hat) == x)
        # radius 0 only accepts an exact match
        strict = SyndromeFamily(7, tau=0.1, matrices=[_hamming_7])
        self.assertTrue(gf2.syndrome_decode(strict, 0, s, x_hat) is None)
        self.assertTrue(gf2.decode_candidate(strict, 0, s, x_hat) == x)

    def testDecodeMatchesNearestCoset(self):
        family = SyndromeFamily(10, tau=0.25, family_size=3, seed=9)
        self.assertTrue(family.radius == 2)
        rng = make_rng(8)
        for j in family.index_set:
            for _ in range(30):
                x = BitString.from_bits(rng.integers(0, 2, 10))
                weight = int(rng.integers(0, 5))
                e = numpy.zeros(10, dtype=numpy.uint8)
                e[rng.choice(10, size=weight, replace=False)] = 1
                x_hat = x ^ BitString.from_bits(e)
                s = gf2.syndrome_compute(family, j, x)
                nearest = _nearest_coset_member(family, j, s, x_hat)
                self.assertTrue(gf2.decode_candidate(family, j, s, x_hat) == nearest)
                self.assertTrue(gf2.syndrome_compute(family, j, nearest) == s)
                decoded = gf2.syndrome_decode(family, j, s, x_hat)
                if gf2.hamming_distance(nearest, x_hat) <= family.radius:
                    self.assertTrue(decoded == nearest)
                else:
                    self.assertTrue(decoded is None)

    def testTableRadius(self):
        family = SyndromeFamily(10, tau=0.1, family_size=2, seed=4)
        self.assertTrue(family.radius == 1 and family.table_regime)
        x_hat = BitString.zeros(10)
        failures = 0
        for t in range(2 ** family.syndrome_len):
            s = BitString(t, family.syndrome_len)
            leader = _nearest_coset_member(family, 1, s, x_hat)
            decoded = gf2.syndrome_decode(family, 1, s, x_hat)
            self.assertTrue(gf2.decode_candidate(family, 1, s, x_hat) == leader)
            if leader.weight() > family.radius:
                failures += 1
                self.assertTrue(decoded is None)
            else:
                self.assertTrue(decoded == leader)
        # 32 cosets, at most 11 of them have a leader of weight 0 or 1
        self.assertTrue(failures >= 21)

    def testSolveSyndrome(self):
        rng = make_rng(11)
        for _ in range(20):
            h = rng.integers(0, 2, size=(12, 30))
            e = rng.integers(0, 2, size=30)
            target = h.dot(e) & 1
            solution = gf2.solve_syndrome(h, target)
            self.assertTrue(((h.dot(solution) & 1) == target).all())
        h = numpy.array([[1, 1, 0], [0, 0, 0]])
        self.assertTrue(gf2.solve_syndrome(h, numpy.array([1, 1])) is None)
        self.assertTrue(list(gf2.solve_syndrome(h, numpy.array([1, 0]))) == [1, 0, 0])

    def testBitFlipRadius(self):
        family = SyndromeFamily(64, tau=0.1, family_size=4, seed=2)
        self.assertTrue(family.radius == 6)
        rng = make_rng(9)
        recovered = failures = 0
        for j in family.index_set:
            for _ in range(20):
                x = BitString.from_bits(rng.integers(0, 2, 64))
                s = gf2.syndrome_compute(family, j, x)
                x_hat = x ^ BitString(1 << int(rng.integers(0, 64)), 64)
                decoded = gf2.syndrome_decode(family, j, s, x_hat)
                if decoded is None:
                    failures += 1
                else:
                    self.assertTrue(gf2.hamming_distance(decoded, x_hat) <= family.radius)
                    recovered += decoded == x
        self.assertTrue(recovered > failures)
        # a block far from every candidate within the radius can't decode
        x = BitString.zeros(64)
        far = BitString.from_bits([1] * 32 + [0] * 32)
        s = gf2.syndrome_compute(family, 0, x)
        out = gf2.syndrome_decode(family, 0, s, far)
        self.assertTrue(out is None or gf2.hamming_distance(out, far) <= family.radius)
        # complete decoding always lands in the coset of s
        for x_hat in (far, BitString.from_bits([0, 1] * 32), BitString.from_bits(rng.integers(0, 2, 64))):
            candidate = gf2.decode_candidate(family, 0, s, x_hat)
            self.assertTrue(candidate is not None and gf2.syndrome_compute(family, 0, candidate) == s)

    def testUnknownIndex(self):
        family = SyndromeFamily(8, family_size=4)
        self.assertTrue(firesException(lambda: family.check_rows(4)))
        self.assertTrue(firesException(lambda: gf2.syndrome_compute(family, -1, BitString.zeros(8))))

    def testSerialization(self):
        family = SyndromeFamily(12, 5, 0.1, 0.5, 32, 77)
        again = SyndromeFamily.from_dict(family.to_dict())
        self.assertTrue(all(again.check_rows(j) == family.check_rows(j) for j in family.index_set))

    def testSyndromeUniformity(self):
        family = SyndromeFamily(8, family_size=16, seed=12)
        delta_squared = gf2.bias_squared(family)
        self.assertTrue(0 < delta_squared <= 1)
        rng = make_rng(10)
        support = sorted(int(_) for _ in rng.choice(256, size=2 ** 6, replace=False))
        distance = gf2.exact_syndrome_distance(family, support)
        self.assertTrue(distance ** 2 <= delta_squared * 2 ** (8 - 6))
        self.assertTrue(abs(gf2.empirical_bias(family) ** 2 - float(delta_squared)) < 1e-12)

class TestPasswordCode(unittest.TestCase):
    def testRepetition(self):
        code = gf2.PasswordCode.from_table(["++++", "xxxx"], 1)
        self.assertTrue(gf2.verify_min_distance(code) == 4 == code.min_distance)
        self.assertTrue(gf2.password_encode(code, 1) == BitString.from_bits("1111"))
        self.assertTrue(firesException(lambda: gf2.password_encode(code, 2)))
        self.assertTrue(firesException(lambda: gf2.PasswordCode.from_table(["++++", "+++x"], 0.5)))

    def testSampled(self):
        code = gf2.sample_password_code(8, 16, 0.25, 3)
        words = code.table
        self.assertTrue(len(set(words)) == 8)
        oracle = min(gf2.hamming_distance(a, b) for a, b in itertools.combinations(words, 2))
        self.assertTrue(gf2.verify_min_distance(code) == oracle >= 4)
        self.assertTrue(gf2.sample_password_code(8, 16, 0.25, 3).table == words)
        big = gf2.sample_password_code(256, 64, 0.2, 5)
        self.assertTrue(all(gf2.hamming_distance(a, b) >= 13 for a, b in itertools.combinations(big.table, 2)))

    def testSinglePassword(self):
        code = gf2.sample_password_code(1, 12, 0.5, 0)
        self.assertTrue(gf2.verify_min_distance(code) == 12)
        self.assertTrue(gf2.password_encode(code, 0) == BitString.zeros(12))

# Run the tests.
if __name__ == "__main__":
    unittest.main()
