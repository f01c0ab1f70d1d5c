"""Local HTTP service backing the web UI's two-phase decrypt.

Credentials travel only in request bodies and are never logged; the
default bind is loopback because requests carry passwords and plaintext.
Phase 1 of a wrong password still returns 200 with an image: the server
cannot tell candidates apart, and saying otherwise would leak an oracle.
"""

from __future__ import annotations

import base64
import secrets
import threading
import time
from dataclasses import dataclass

from fastapi import FastAPI, Form, HTTPException, Response, UploadFile
from pydantic import BaseModel

from . import vault
from .errors import AuthFailure, MalformedContainer, PcvError

_LOOPBACK = {"127.0.0.1", "::1", "localhost"}


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    session_ttl: float = vault.SESSION_TTL
    max_sessions: int = 16
    allow_remote: bool = False

    def __post_init__(self):
        if self.session_ttl <= 0:
            raise ValueError("session TTL must be positive")
        if self.max_sessions < 1:
            raise ValueError("need at least one session slot")
        if self.host not in _LOOPBACK and not self.allow_remote:
            raise ValueError(
                f"refusing non-loopback bind {self.host!r} without allow_remote "
                "(this service transports passwords and plaintext)")


class _SessionStore:
    """Bounded in-memory store; phase 2 consumes its session."""

    def __init__(self, limit: int, clock=time.monotonic):
        self._lock = threading.Lock()
        self._sessions: dict[str, vault.DecryptSession] = {}
        self._limit = limit
        self._clock = clock

    def put(self, session: vault.DecryptSession) -> str:
        with self._lock:
            now = self._clock()
            for sid in [s for s, v in self._sessions.items()
                        if v.used or v.expires_at < now]:
                del self._sessions[sid]
            if len(self._sessions) >= self._limit:
                raise HTTPException(429, "too many open decrypt sessions")
            sid = secrets.token_urlsafe(24)
            self._sessions[sid] = session
            return sid

    def take(self, sid: str) -> vault.DecryptSession:
        with self._lock:
            session = self._sessions.pop(sid, None)
        if session is None:
            raise HTTPException(410, "unknown or expired session")
        return session


class Phase2Request(BaseModel):
    session_id: str
    sk: str


def create_app(config: ServiceConfig = ServiceConfig()) -> FastAPI:
    app = FastAPI(title="lattice vault", docs_url=None, redoc_url=None)
    store = _SessionStore(config.max_sessions)
    app.state.config = config
    app.state.store = store

    @app.get("/v1/health")
    def health():
        return {"status": "ok"}

    @app.post("/v1/encrypt")
    async def encrypt(payload: UploadFile, sp: str = Form("")):
        data = await payload.read()
        if not sp:
            raise HTTPException(400, "password must be non-empty")
        try:
            container, receipt = vault.encrypt_flow(data, sp)
        except PcvError as exc:
            raise HTTPException(400, str(exc)) from exc
        return Response(
            content=container.serialize(),
            media_type="application/octet-stream",
            headers={"X-Self-Check-Attempts": str(receipt.attempts)})

    @app.post("/v1/decrypt/phase1")
    async def phase1(container: UploadFile, sp: str = Form("")):
        raw = await container.read()
        if not sp:
            raise HTTPException(400, "password must be non-empty")
        try:
            session = vault.decrypt_phase1(raw, sp, ttl=config.session_ttl)
        except MalformedContainer as exc:
            raise HTTPException(400, str(exc)) from exc
        sid = store.put(session)
        return {
            "session_id": sid,
            "image_pgm_base64": base64.b64encode(session.image_pgm).decode(),
            "expires_in": config.session_ttl,
        }

    @app.post("/v1/decrypt/phase2")
    def phase2(req: Phase2Request):
        session = store.take(req.session_id)
        try:
            payload = vault.decrypt_phase2(session, req.sk.strip().upper())
        except AuthFailure as exc:
            raise HTTPException(401, "wrong password or strong key") from exc
        except PcvError as exc:
            raise HTTPException(410, str(exc)) from exc
        return Response(content=payload, media_type="application/octet-stream")

    return app
