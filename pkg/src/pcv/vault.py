"""Container crypto: state bit-splitting, key derivation, encryption flows.

The final lattice state is split value-by-value into a public
more-significant half (F1) and a chaos-randomized less-significant half
(F2).  F2 is stream-encrypted under a key derived from the short password
alone, deliberately without an integrity tag: an authenticated F2 would
hand a brute-force attacker an instant wrong-password rejector.  The data
payload is sealed with authenticated encryption under a key derived from
the short password and the strong key together.
"""

from __future__ import annotations

import os
import secrets
import struct
import time
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives import hashes
from cryptography.hazmat.primitives.ciphers import Cipher, algorithms, modes
from cryptography.hazmat.primitives.ciphers.aead import AESGCM
from cryptography.hazmat.primitives.kdf.pbkdf2 import PBKDF2HMAC

from . import lattice as lat
from .errors import (AuthFailure, EmptyPassword, EntropyUnavailable,
                     LengthMismatch, MalformedContainer, SelfCheckExhausted,
                     SessionExpired)
from .glyphs import (Charset, DEFAULT_CHARSET, GlyphMask, charset_by_id,
                     generate_sk, imprint, layout_masks, render_pgm)
from .lattice import LatticeState, SignField, SimParams

MAGIC = b"PCV1"
VERSION = 1
DEFAULT_KDF_WORK = 200_000   # PBKDF2-SHA256 iterations, ~100 ms on the reference box
SALT_LEN = 16
NONCE_LEN = 16
SESSION_TTL = 600.0          # seconds
SELF_CHECK_RETRIES = 5
MASK_FIDELITY_MIN = 0.99

_HEADER = struct.Struct("<4sHHIQQBBI16s16s16sQQQ")


@dataclass
class SplitState:
    """More- and less-significant 32-bit halves of every state value.

    Plane order is u then p, row-major; each binary64 contributes one
    little-endian 32-bit word to each half.
    """

    f1: bytes
    f2: bytes
    n: int

    def __post_init__(self):
        expect = self.n * self.n * 2 * 4
        if len(self.f1) != expect or len(self.f2) != expect:
            raise LengthMismatch(
                f"halves must be {expect} bytes for N={self.n}, "
                f"got {len(self.f1)}/{len(self.f2)}")


def split_state(fs: LatticeState) -> SplitState:
    values = np.concatenate([fs.u.ravel(), fs.p.ravel()])
    bits = values.view(np.uint64)
    hi = (bits >> np.uint64(32)).astype("<u4")
    lo = (bits & np.uint64(0xFFFFFFFF)).astype("<u4")
    return SplitState(hi.tobytes(), lo.tobytes(), fs.params.n)


def merge_state(s: SplitState, params: SimParams, t: float = 0.0) -> LatticeState:
    if s.n != params.n:
        raise LengthMismatch("split layout does not match params")
    hi = np.frombuffer(s.f1, dtype="<u4").astype(np.uint64)
    lo = np.frombuffer(s.f2, dtype="<u4").astype(np.uint64)
    values = ((hi << np.uint64(32)) | lo).view(np.float64)
    n2 = params.n * params.n
    u = values[:n2].reshape(params.n, params.n).copy()
    p = values[n2:].reshape(params.n, params.n).copy()
    return LatticeState(u, p, t, params)


@dataclass
class KeyMaterial:
    """Derived keys; zeroize() scrubs them once a flow is done."""

    k2: bytearray
    ek: Optional[bytearray]
    salt: bytes
    work: int

    def zeroize(self) -> None:
        for buf in (self.k2, self.ek):
            if buf is not None:
                for i in range(len(buf)):
                    buf[i] = 0


def _pbkdf2(secret: bytes, salt: bytes, work: int, label: bytes) -> bytearray:
    kdf = PBKDF2HMAC(algorithm=hashes.SHA256(), length=32,
                     salt=salt + label, iterations=work)
    return bytearray(kdf.derive(secret))


def derive_keys(sp: str, sk_text: Optional[str], salt: bytes, work: int) -> KeyMaterial:
    """K2 from the short password alone; EK from password and strong key.

    Domain separation comes from distinct labels mixed into the salt, so
    K2 never reveals anything about EK even for sk=''.
    """
    if not sp:
        raise EmptyPassword("short password must be non-empty")
    k2 = _pbkdf2(sp.encode(), salt, work, b"F2")
    ek = None
    if sk_text is not None:
        ek = _pbkdf2(sp.encode() + b"\x00" + sk_text.encode(), salt, work, b"DATA")
    return KeyMaterial(k2, ek, salt, work)


def encrypt_f2(f2: bytes, k2: bytes, nonce: bytes) -> bytes:
    """AES-256-CTR keystream XOR; same length out, no tag (deliberate)."""
    enc = Cipher(algorithms.AES(bytes(k2)), modes.CTR(nonce)).encryptor()
    return enc.update(f2) + enc.finalize()


def decrypt_f2(ef2: bytes, k2: bytes, nonce: bytes) -> bytes:
    # CTR is its own inverse; any key yields a structurally valid F2.
    return encrypt_f2(ef2, k2, nonce)


def seal_data(d: bytes, ek: bytes, nonce: bytes) -> bytes:
    return AESGCM(bytes(ek)).encrypt(nonce, d, None)


def open_data(ed: bytes, ek: bytes, nonce: bytes) -> bytes:
    try:
        return AESGCM(bytes(ek)).decrypt(nonce, ed, None)
    except InvalidTag as exc:
        raise AuthFailure("wrong key material or tampered data") from exc


@dataclass
class VaultContainer:
    params: SimParams
    charset_id: int
    sk_len: int
    kdf_work: int
    salt: bytes
    nonce_f2: bytes
    nonce_d: bytes
    ed: bytes
    f1: bytes
    ef2: bytes
    version: int = VERSION

    def serialize(self) -> bytes:
        p = self.params
        header = _HEADER.pack(
            MAGIC, self.version, p.n, p.tau_steps,
            np.float64(p.h).view(np.uint64).item(),
            np.float64(p.temperature).view(np.uint64).item(),
            self.charset_id, self.sk_len, self.kdf_work,
            self.salt, self.nonce_f2, self.nonce_d,
            len(self.ed), len(self.f1), len(self.ef2))
        return header + self.ed + self.f1 + self.ef2


def parse_container(data: bytes) -> VaultContainer:
    if len(data) < _HEADER.size:
        raise MalformedContainer("truncated header")
    try:
        (magic, version, n, tau_steps, h_bits, t_bits, charset_id, sk_len,
         kdf_work, salt, nonce_f2, nonce_d, len_ed, len_f1,
         len_ef2) = _HEADER.unpack_from(data)
    except struct.error as exc:
        raise MalformedContainer(str(exc)) from exc
    if magic != MAGIC:
        raise MalformedContainer("bad magic")
    if version != VERSION:
        raise MalformedContainer(f"unsupported version {version}")
    body = data[_HEADER.size:]
    if len(body) != len_ed + len_f1 + len_ef2:
        raise MalformedContainer("section lengths inconsistent with file size")
    half = n * n * 2 * 4
    if len_f1 != half or len_ef2 != half:
        raise MalformedContainer("state section length inconsistent with N")
    h = float(np.uint64(h_bits).view(np.float64))
    temp = float(np.uint64(t_bits).view(np.float64))
    try:
        params = SimParams(n=n, h=h, temperature=temp, tau_steps=tau_steps)
    except ValueError as exc:
        raise MalformedContainer(str(exc)) from exc
    ed = body[:len_ed]
    f1 = body[len_ed:len_ed + len_f1]
    ef2 = body[len_ed + len_f1:]
    return VaultContainer(params, charset_id, sk_len, kdf_work, salt,
                          nonce_f2, nonce_d, ed, f1, ef2, version=version)


def _oracle_decode(bits: SignField, charset: Charset, sk_len: int):
    from .attack import template_oracle  # local import: attack uses this module
    return template_oracle(bits, charset, sk_len)


@dataclass
class EncryptReceipt:
    """Non-secret byproducts of an encrypt run (the strong key is discarded)."""

    attempts: int
    self_check_fidelity: float


def encrypt_flow(d: bytes, sp: str, params: SimParams = SimParams(),
                 charset: Charset = DEFAULT_CHARSET, sk_len: int = 5,
                 kdf_work: int = DEFAULT_KDF_WORK,
                 therm_seed: Optional[int] = None,
                 deform_seed: Optional[int] = None,
                 entropy=secrets) -> tuple[VaultContainer, EncryptReceipt]:
    """Full encryption pipeline with the legibility self-check.

    A fresh strong key is imprinted into a thermalized lattice, evolved
    forward, and the forward state is committed only after a trial
    backward evolution restores an image that both exceeds the mask
    fidelity threshold and machine-decodes to the strong key.  An
    illegible p-CAPTCHA would permanently lock the data, so failures
    re-thermalize with a new seed (up to 5 attempts).  The strong key and
    the imprinted image are discarded: the user reads them back from the
    p-CAPTCHA at decrypt time.
    """
    if not sp:
        raise EmptyPassword("short password must be non-empty")
    from .analysis import recovery_fidelity  # avoid import cycle at module load
    sk = generate_sk(charset, sk_len, entropy=entropy)
    if therm_seed is None:
        therm_seed = int.from_bytes(os.urandom(8), "little")
    if deform_seed is None:
        deform_seed = int.from_bytes(os.urandom(8), "little")
    fs = None
    fidelity = 0.0
    attempts = 0
    for attempt in range(SELF_CHECK_RETRIES):
        attempts = attempt + 1
        mask = layout_masks(sk, params.n, deform_seed + attempt)
        isk = imprint(lat.thermalize(params, therm_seed + attempt), mask)
        forward = lat.integrate(isk, params.tau_steps)
        restored = lat.integrate(lat.time_reverse(forward), params.tau_steps)
        fidelity = recovery_fidelity(lat.sign_field(isk), lat.sign_field(restored), mask)
        decoded, _ = _oracle_decode(lat.sign_field(restored), charset, sk_len)
        if fidelity >= MASK_FIDELITY_MIN and decoded == sk.text:
            fs = forward
            break
    if fs is None:
        raise SelfCheckExhausted(
            f"p-CAPTCHA self-check failed {SELF_CHECK_RETRIES} times "
            f"(last fidelity {fidelity:.4f})")
    halves = split_state(fs)
    salt = os.urandom(SALT_LEN)
    nonce_f2 = os.urandom(NONCE_LEN)
    nonce_d = os.urandom(NONCE_LEN)
    keys = derive_keys(sp, sk.text, salt, kdf_work)
    try:
        ef2 = encrypt_f2(halves.f2, keys.k2, nonce_f2)
        ed = seal_data(d, keys.ek, nonce_d)
    finally:
        keys.zeroize()
    container = VaultContainer(params, charset.id, sk_len, kdf_work, salt,
                               nonce_f2, nonce_d, ed, halves.f1, ef2)
    return container, EncryptReceipt(attempts, fidelity)


@dataclass
class DecryptSession:
    """Phase-1 output awaiting the human-read strong key.

    Single use; holds the short password transiently so phase 2 can
    derive the data key, then scrubs it whatever the outcome.
    """

    image: SignField
    container: VaultContainer
    _sp: bytearray
    expires_at: float
    used: bool = False
    clock: callable = field(default=time.monotonic, repr=False)

    @property
    def image_pgm(self) -> bytes:
        return render_pgm(self.image.bits)

    def _scrub(self) -> None:
        for i in range(len(self._sp)):
            self._sp[i] = 0
        self.used = True


def decrypt_phase1(container_bytes, sp: str, ttl: float = SESSION_TTL,
                   clock=time.monotonic) -> DecryptSession:
    """Decrypt F2, rebuild the final state, evolve back, render the image.

    Never fails on a wrong password: every candidate F2 merges into a
    structurally valid state whose backward evolution just lands on an
    anonymous domain pattern.
    """
    if isinstance(container_bytes, VaultContainer):
        container = container_bytes
    else:
        container = parse_container(container_bytes)
    keys = derive_keys(sp, None, container.salt, container.kdf_work)
    try:
        f2 = decrypt_f2(container.ef2, keys.k2, container.nonce_f2)
    finally:
        keys.zeroize()
    fs = merge_state(SplitState(container.f1, f2, container.params.n),
                     container.params, t=container.params.tau)
    restored = lat.integrate(lat.time_reverse(fs), container.params.tau_steps)
    return DecryptSession(lat.sign_field(restored), container,
                          bytearray(sp.encode()), clock() + ttl, clock=clock)


def decrypt_phase2(session: DecryptSession, sk_typed: str) -> bytes:
    """Combine the typed strong key with the stored password and open the data."""
    if session.used or session.clock() > session.expires_at:
        session._scrub()
        raise SessionExpired("session expired or already consumed")
    sp = session._sp.decode()
    keys = derive_keys(sp, sk_typed, session.container.salt,
                       session.container.kdf_work)
    try:
        return open_data(session.container.ed, keys.ek, session.container.nonce_d)
    finally:
        keys.zeroize()
        session._scrub()
