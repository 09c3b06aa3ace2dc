"""
Split authentication: link initialization with fresh signature keys, per-message signing with
counters, and a compiler that wraps every classical flow of a session runner.
PEP8
"""
import json
from collections import namedtuple
from qpake.utils import verify, stringish, intish, dictish, make_rng, QPakeError, AuthenticationAbort
from qpake.crypto import GroupParams, sig_keygen, sign, verify_sig
from qpake import pake, qchannel

PARTY_IDS = {pake.CLIENT: "P1", pake.SERVER: "P2"}
_peer_ids = {"P1": "P2", "P2": "P1"}
LINK_HELLO = "LinkHello"
LINK_CONFIRM = "LinkConfirm"

def _lp(b):
    return len(b).to_bytes(4, "big") + b

def _group(params):
    group = params.group if hasattr(params, "group") else params
    verify(isinstance(group, GroupParams), "params needs to be a ProtocolParams or a GroupParams")
    return group

def make_sid(group, pairs):
    """
    canonical session identifier: the (party id, vk) pairs in lexicographic order, length prefixed
    """
    return b"".join(_lp(pid.encode("utf-8")) + _lp(group.element_to_bytes(vk)) for pid, vk in sorted(pairs))

def signed_tuple(sid, m, recipient, counter):
    return _lp(sid) + _lp(bytes(m)) + _lp(recipient.encode("utf-8")) + counter.to_bytes(8, "big")

def _confirm_tuple(sid, signer):
    return _lp(LINK_CONFIRM.encode("utf-8")) + _lp(sid) + _lp(signer.encode("utf-8"))

class LinkState(object):
    """
    One endpoint of an authenticated link.
    """
    def __init__(self, party_id, group, keypair, peer_vk, sid, rng):
        self.party_id, self.peer_id = party_id, _peer_ids[party_id]
        self.group, self.keypair, self.peer_vk, self.sid = group, keypair, peer_vk, sid
        self.rng = rng
        self.send_counter = 0
        self.seen_counters = set()

class SignedEnvelope(namedtuple("SignedEnvelope", ["sender", "counter", "m", "sig"])):
    def to_bytes(self):
        return json.dumps({"sender": self.sender, "counter": self.counter.to_bytes(8, "big").hex(),
                           "m": self.m.hex(), "sig": self.sig.hex()},
                          sort_keys=True, separators=(",", ":")).encode("utf-8")
    @classmethod
    def from_bytes(cls, data):
        try:
            d = json.loads(bytes(data).decode("utf-8"))
            verify(dictish(d) and set(d) == {"sender", "counter", "m", "sig"}, "malformed envelope")
            verify(all(stringish(d[_]) for _ in d), "malformed envelope")
            counter = bytes.fromhex(d["counter"])
            verify(len(counter) == 8, "the counter needs 8 bytes")
            return cls(d["sender"], int.from_bytes(counter, "big"), bytes.fromhex(d["m"]), bytes.fromhex(d["sig"]))
        except (ValueError, TypeError, UnicodeDecodeError):
            raise QPakeError("malformed envelope")

class LinkHandshake(object):
    """
    The link initialization of one party as three steps: hello produces the key announcement,
    confirm consumes the peer's announcement and produces the signed sid, finish consumes the
    peer's signed sid and returns the LinkState. A failed check raises AuthenticationAbort.
    """
    def __init__(self, party_id, params, rng):
        verify(party_id in _peer_ids, "party_id needs to be one of %s" % sorted(_peer_ids))
        self.party_id, self.group, self.rng = party_id, _group(params), rng
        self.keypair = sig_keygen(self.group, rng)
        self.sid = None
    def hello(self):
        return json.dumps({"party": self.party_id, "vk": self.group.element_to_hex(self.keypair.vk)},
                          sort_keys=True).encode("utf-8")
    def confirm(self, peer_hello):
        try:
            d = json.loads(bytes(peer_hello).decode("utf-8"))
            verify(dictish(d) and set(d) == {"party", "vk"}, "malformed hello")
            verify(d["party"] == _peer_ids[self.party_id], "hello from an unexpected party")
            self.peer_vk = self.group.element_from_hex(d["vk"])
        except (QPakeError, ValueError, TypeError, UnicodeDecodeError):
            raise AuthenticationAbort("%s rejected the peer's key announcement" % self.party_id)
        self.sid = make_sid(self.group, [(self.party_id, self.keypair.vk), (d["party"], self.peer_vk)])
        sig = sign(self.group, self.keypair.sk, _confirm_tuple(self.sid, self.party_id), self.rng)
        return json.dumps({"party": self.party_id, "sid": self.sid.hex(), "sig": sig.hex()},
                          sort_keys=True).encode("utf-8")
    def finish(self, peer_confirm):
        verify(self.sid is not None, "confirm needs to run before finish")
        try:
            d = json.loads(bytes(peer_confirm).decode("utf-8"))
            verify(dictish(d) and set(d) == {"party", "sid", "sig"}, "malformed confirmation")
            sid, sig = bytes.fromhex(d["sid"]), bytes.fromhex(d["sig"])
        except (QPakeError, ValueError, TypeError, UnicodeDecodeError):
            raise AuthenticationAbort("%s received a malformed confirmation" % self.party_id)
        peer = _peer_ids[self.party_id]
        if d["party"] != peer or sid != self.sid or \
           not verify_sig(self.group, self.peer_vk, _confirm_tuple(sid, peer), sig):
            raise AuthenticationAbort("%s rejected the peer's sid confirmation" % self.party_id)
        return LinkState(self.party_id, self.group, self.keypair, self.peer_vk, self.sid, self.rng)

def link_init(party_id, params, rng, transport):
    """
    Run link initialization for one party.

    :param party_id: "P1" or "P2"

    :param params: ProtocolParams or GroupParams naming the signature group

    :param rng: numpy Generator for keys and signatures

    :param transport: object with send(bytes) and receive() -> bytes (possibly adversarial)

    :return: LinkState, or None if the link was rejected
    """
    handshake = LinkHandshake(party_id, params, rng)
    transport.send(handshake.hello())
    try:
        transport.send(handshake.confirm(transport.receive()))
        return handshake.finish(transport.receive())
    except AuthenticationAbort:
        return None

def establish_links(params, rng_a, rng_b, tamper=None):
    """
    Run link initialization for both parties, routing every message through tamper.

    :param tamper: optional callable(direction, tag, data) -> bytes or None (drop)

    :return: (client LinkState or None, server LinkState or None)
    """
    a = LinkHandshake(PARTY_IDS[pake.CLIENT], params, rng_a)
    b = LinkHandshake(PARTY_IDS[pake.SERVER], params, rng_b)
    def route(direction, tag, data):
        return data if tamper is None else tamper(direction, tag, data)
    hello_ab, hello_ba = route("C->S", LINK_HELLO, a.hello()), route("S->C", LINK_HELLO, b.hello())
    rtn = {}
    confirms = {}
    for name, hs, hello, direction in (("a", a, hello_ba, "C->S"), ("b", b, hello_ab, "S->C")):
        try:
            verify(hello is not None, "dropped")
            confirms[name] = route(direction, LINK_CONFIRM, hs.confirm(hello))
        except (AuthenticationAbort, QPakeError):
            rtn[name] = None
    for name, hs, other in (("a", a, "b"), ("b", b, "a")):
        if name in rtn:
            continue
        try:
            verify(confirms.get(other) is not None, "no confirmation")
            rtn[name] = hs.finish(confirms[other])
        except (AuthenticationAbort, QPakeError):
            rtn[name] = None
    return rtn["a"], rtn["b"]

def wrap_message(link, m):
    """
    Sign m together with the sid, the recipient and the current counter, then advance the counter.

    :return: SignedEnvelope
    """
    verify(isinstance(link, LinkState), "link needs to be a LinkState")
    verify(isinstance(m, (bytes, bytearray)), "m needs to be bytes")
    counter = link.send_counter
    sig = sign(link.group, link.keypair.sk, signed_tuple(link.sid, m, link.peer_id, counter), link.rng)
    link.send_counter += 1
    return SignedEnvelope(link.party_id, counter, bytes(m), sig)

def unwrap_message(link, env):
    """
    Accept env if it comes from the peer, its counter is new, and its signature verifies over
    (sid, m, this party as recipient, counter).

    :return: the message bytes. Raises AuthenticationAbort otherwise.
    """
    verify(isinstance(link, LinkState), "link needs to be a LinkState")
    if not isinstance(env, SignedEnvelope) or env.sender != link.peer_id:
        raise AuthenticationAbort("envelope from an unexpected sender")
    if not intish(env.counter) or env.counter in link.seen_counters:
        raise AuthenticationAbort("replayed counter %s" % (env.counter,))
    if not verify_sig(link.group, link.peer_vk, signed_tuple(link.sid, env.m, link.party_id, env.counter),
                      env.sig):
        raise AuthenticationAbort("bad signature")
    link.seen_counters.add(env.counter)
    return env.m

class LinkSealer(object):
    """
    Seals and opens classical flows for a run_session call. Keeps the ground truth of what each
    side sent and what each side accepted.
    """
    def __init__(self, client_link, server_link):
        self.links = {pake.CLIENT: client_link, pake.SERVER: server_link}
        self.sent = []
        self.accepted = []
    def seal(self, role, data):
        env = wrap_message(self.links[role], data)
        self.sent.append((role, env.counter, env.m))
        return env.to_bytes()
    def open(self, role, data):
        try:
            env = SignedEnvelope.from_bytes(data)
            m = unwrap_message(self.links[role], env)
        except (AuthenticationAbort, QPakeError):
            return None
        self.accepted.append((role, env.counter, m))
        return m

def compile_protocol(runner=None, sealers=None):
    """
    Wrap a session runner (run_session when None) so every classical flow is signed and verified.
    The quantum flow passes unwrapped; a failed link or a rejected envelope aborts with "authentication".

    :param sealers: optional list receiving the LinkSealer of every session that established its links

    :return: a runner with the run_session signature
    """
    verify(sealers is None or isinstance(sealers, list), "sealers needs to be a list")
    runner = runner or pake.run_session
    def compiled(params, pw_client, pw_server, channel=None, classical_tamper=None, seed=0):
        link_a, link_b = establish_links(params, make_rng(seed, 11), make_rng(seed, 12), classical_tamper)
        if link_a is None or link_b is None:
            channel = channel if channel is not None else qchannel.ideal()
            transcript = pake.new_transcript(params, pw_client, pw_server, channel, seed, True)
            outcomes = {}
            for role, link in ((pake.CLIENT, link_a), (pake.SERVER, link_b)):
                outcomes[role] = pake.Outcome("abort", pake.AUTHENTICATION if link is None else pake.TIMEOUT)
                transcript.outcomes[role] = outcomes[role].to_dict()
            return outcomes[pake.CLIENT], outcomes[pake.SERVER], transcript
        sealer = LinkSealer(link_a, link_b)
        if sealers is not None:
            sealers.append(sealer)
        return runner(params, pw_client, pw_server, channel, classical_tamper, seed, sealer=sealer)
    compiled.compiled = True
    return compiled
