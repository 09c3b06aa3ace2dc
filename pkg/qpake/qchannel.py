"""
Product-state BB84 simulation: preparation, transmission under channel attacks, and measurement.
Requires numpy.
PEP8
"""
from collections import namedtuple
import numpy
from qpake.utils import freezable_factory, verify, containerish, numericish, stringish, UsageError

class Basis(object):
    """
    The two BB84 bases. Serialized as 0 for PLUS (computational) and 1 for TIMES (Hadamard).
    """
    PLUS = 0
    TIMES = 1
    symbols = {PLUS: "+", TIMES: "x"}
    @staticmethod
    def valid(b):
        return b in (Basis.PLUS, Basis.TIMES)
    @staticmethod
    def render(bases):
        return "".join(Basis.symbols[int(_)] for _ in bases)

Qubit = namedtuple("Qubit", ["basis", "bit"])

def _as_binary_array(x, name):
    if stringish(x):
        verify(set(x) <= {"0", "1"}, "%s needs to be a string of 0/1 characters" % name)
        x = [int(_) for _ in x]
    verify(containerish(x), "%s needs to be a sequence of bits" % name)
    rtn = numpy.asarray(list(x) if not isinstance(x, numpy.ndarray) else x)
    verify(rtn.ndim == 1, "%s needs to be one dimensional" % name)
    verify(((rtn == 0) | (rtn == 1)).all(), "%s can only contain 0 and 1 entries" % name)
    return rtn.astype(numpy.uint8)

class QuantumRegister(freezable_factory(object, "_isFrozen", {"_measured"})):
    """
    A register of BB84 qubits, each one a classical (basis, bit) pair.
    A register can be measured at most once.
    """
    def __init__(self, bases, bits):
        bases, bits = _as_binary_array(bases, "bases"), _as_binary_array(bits, "bits")
        verify(len(bases) == len(bits), "bases and bits need to have the same length")
        bases.setflags(write=False)
        bits.setflags(write=False)
        self._bases, self._bits = bases, bits
        self._measured = False
        self._isFrozen = True
    @property
    def length(self):
        return len(self._bits)
    def __len__(self):
        return self.length
    @property
    def measured(self):
        return self._measured
    @property
    def qubits(self):
        return tuple(Qubit(int(a), int(b)) for a, b in zip(self._bases, self._bits))
    @property
    def bases(self):
        return self._bases
    @property
    def bits(self):
        return self._bits
    def _consume(self):
        if self._measured:
            raise UsageError("this register has already been measured")
        self._measured = True
    def to_hex(self):
        """
        Serialize as interleaved (basis, bit) pairs, 2 bits per qubit, big-endian within a byte.
        """
        pairs = numpy.empty(2 * self.length, dtype=numpy.uint8)
        pairs[0::2], pairs[1::2] = self._bases, self._bits
        return numpy.packbits(pairs).tobytes().hex()
    @classmethod
    def from_hex(cls, hex_str, length):
        verify(stringish(hex_str), "hex_str needs to be a string")
        raw = bytes.fromhex(hex_str)
        verify(len(raw) == (2 * length + 7) // 8, "hex_str has the wrong size for %s qubits" % length)
        pairs = numpy.unpackbits(numpy.frombuffer(raw, dtype=numpy.uint8))
        verify(not pairs[2 * length:].any(), "non-zero padding in register encoding")
        return cls(pairs[0:2 * length:2], pairs[1:2 * length:2])
    def __repr__(self):
        return "QuantumRegister(%s qubits)" % self.length

class ChannelModel(namedtuple("ChannelModel", ["kind", "p", "basis", "hook"])):
    """
    How the quantum flow is treated in transit. Build these with the module level factories
    ideal, bit_flip, intercept_resend and scripted.
    """
    IDEAL = "ideal"
    BIT_FLIP = "bitflip"
    INTERCEPT_RESEND = "intercept_resend"
    SCRIPTED = "scripted"
    def describe(self):
        if self.kind == self.BIT_FLIP:
            return "bitflip(%s)" % self.p
        if self.kind == self.INTERCEPT_RESEND:
            return "intercept_resend(%s)" % ("random" if self.basis is None else Basis.render([self.basis]))
        return self.kind

def ideal():
    return ChannelModel(ChannelModel.IDEAL, 0.0, None, None)

def bit_flip(p):
    verify(numericish(p) and 0 <= p <= 1, "p needs to be a probability in [0, 1]")
    return ChannelModel(ChannelModel.BIT_FLIP, float(p), None, None)

def intercept_resend(basis=None):
    """
    :param basis: None for a fresh random basis per qubit, otherwise the Basis used for every qubit
    """
    verify(basis is None or Basis.valid(basis), "basis needs to be None, Basis.PLUS or Basis.TIMES")
    return ChannelModel(ChannelModel.INTERCEPT_RESEND, 0.0, basis, None)

def scripted(hook):
    """
    :param hook: callable(register, rng) -> QuantumRegister
    """
    verify(callable(hook), "hook needs to be callable")
    return ChannelModel(ChannelModel.SCRIPTED, 0.0, None, hook)

def encode_bb84(x, theta, rng=None):
    """
    Prepare qubit i in basis theta[i] carrying bit x[i]. Deterministic; rng is not consumed.

    :param x: bit sequence of length k

    :param theta: basis sequence of length k

    :param rng: accepted for interface symmetry, unused

    :return: a fresh QuantumRegister
    """
    x, theta = _as_binary_array(x, "x"), _as_binary_array(theta, "theta")
    verify(len(x) == len(theta), "x and theta need to have the same length")
    verify(len(x) >= 1, "at least one qubit needs to be encoded")
    return QuantumRegister(theta, x)

def measure(register, theta_hat, rng):
    """
    Measure every qubit of register. A matching basis returns the stored bit, a
    mismatched basis returns an independent fair coin drawn from rng.

    :param register: a QuantumRegister that has not been measured

    :param theta_hat: basis sequence, one entry per qubit

    :param rng: numpy Generator

    :return: numpy uint8 array of outcomes
    """
    verify(isinstance(register, QuantumRegister), "register needs to be a QuantumRegister")
    theta_hat = _as_binary_array(theta_hat, "theta_hat")
    verify(len(theta_hat) == register.length, "theta_hat length needs to match the register length")
    register._consume()
    coins = rng.integers(0, 2, size=register.length, dtype=numpy.uint8)
    return numpy.where(theta_hat == register.bases, register.bits, coins).astype(numpy.uint8)

def apply_channel(register, model, rng):
    """
    Transmit register through model.

    :param register: an unmeasured QuantumRegister. It is used up: neither measure nor a second
                     apply_channel accepts it afterwards.

    :param model: ChannelModel

    :param rng: numpy Generator (the adversary/noise stream)

    :return: the QuantumRegister arriving at the receiver
    """
    verify(isinstance(register, QuantumRegister), "register needs to be a QuantumRegister")
    verify(isinstance(model, ChannelModel), "model needs to be a ChannelModel")
    if register.measured:
        raise UsageError("a measured or transmitted register can't be transmitted")
    register._consume()
    bases, bits = register.bases, register.bits
    if model.kind == ChannelModel.IDEAL:
        return QuantumRegister(bases, bits)
    if model.kind == ChannelModel.BIT_FLIP:
        flips = (rng.random(register.length) < model.p).astype(numpy.uint8)
        return QuantumRegister(bases, bits ^ flips)
    if model.kind == ChannelModel.INTERCEPT_RESEND:
        if model.basis is None:
            eve_bases = rng.integers(0, 2, size=register.length, dtype=numpy.uint8)
        else:
            eve_bases = numpy.full(register.length, model.basis, dtype=numpy.uint8)
        observed = measure(QuantumRegister(bases, bits), eve_bases, rng)
        return QuantumRegister(eve_bases, observed)
    verify(model.kind == ChannelModel.SCRIPTED, "unrecognized channel kind %s" % model.kind)
    # the hook gets its own unmeasured copy
    rtn = model.hook(QuantumRegister(bases, bits), rng)
    verify(isinstance(rtn, QuantumRegister) and rtn.length == register.length,
           "scripted channel hook needs to return a QuantumRegister of the same length")
    return rtn
