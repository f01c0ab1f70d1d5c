"""Command-line interface: vault flows, physics experiments, attack tools.

Exit codes: 0 success, 2 authentication failure, 3 malformed input,
4 encryption self-check exhausted.  Passwords and strong keys are read
via hidden prompts and never echoed or logged.
"""

from __future__ import annotations

import os
import sys
import tempfile

import click
import numpy as np

from . import analysis, attack, vault
from . import lattice as lat
from .errors import (AuthFailure, DoesNotFit, EmptyPassword,
                     MalformedContainer, PcvError, SelfCheckExhausted)
from .glyphs import (DEFAULT_CHARSET, StrongKey, charset_by_id, imprint,
                     layout_masks, render_image)

EXIT_OK = 0
EXIT_AUTH = 2
EXIT_MALFORMED = 3
EXIT_SELF_CHECK = 4


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _exit_code(exc: PcvError) -> int:
    if isinstance(exc, AuthFailure):
        return EXIT_AUTH
    if isinstance(exc, SelfCheckExhausted):
        return EXIT_SELF_CHECK
    return EXIT_MALFORMED


@click.group()
def main() -> None:
    """Password-hardening file vault on a chaotic oscillator lattice."""


@main.command()
@click.argument("infile", type=click.Path(exists=True, dir_okay=False))
@click.argument("outfile", type=click.Path(dir_okay=False))
@click.option("--sk-len", default=5, show_default=True, help="Strong-key length.")
@click.option("--kdf-work", default=vault.DEFAULT_KDF_WORK, show_default=True,
              help="Key-derivation iteration count.")
def encrypt(infile: str, outfile: str, sk_len: int, kdf_work: int) -> None:
    """Encrypt INFILE into a vault container at OUTFILE."""
    sp = click.prompt("Short password", hide_input=True, confirmation_prompt=True)
    payload = open(infile, "rb").read()
    try:
        container, receipt = vault.encrypt_flow(payload, sp, sk_len=sk_len,
                                                kdf_work=kdf_work)
    except PcvError as exc:
        _fail(_exit_code(exc), str(exc))
    _atomic_write(outfile, container.serialize())
    click.echo(f"wrote {outfile} (self-check attempts: {receipt.attempts}, "
               f"image fidelity: {receipt.self_check_fidelity:.4f})")


def _atomic_write(path: str, data: bytes) -> None:
    """Write via a same-directory temp file; target exists iff write succeeded."""
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".pcv-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@main.command()
@click.argument("infile", type=click.Path(exists=True, dir_okay=False))
@click.argument("outfile", type=click.Path(dir_okay=False))
@click.option("--image-out", type=click.Path(dir_okay=False), default=None,
              help="Where to write the challenge image (default: temp file).")
@click.option("--no-ascii", is_flag=True, help="Skip terminal rendering.")
def decrypt(infile: str, outfile: str, image_out: str, no_ascii: bool) -> None:
    """Decrypt INFILE to OUTFILE (two-phase: password, then key from image)."""
    raw = open(infile, "rb").read()
    sp = click.prompt("Short password", hide_input=True)
    try:
        session = vault.decrypt_phase1(raw, sp)
    except PcvError as exc:
        _fail(_exit_code(exc), str(exc))
    if image_out is None:
        fd, image_out = tempfile.mkstemp(suffix=".pgm", prefix="pcv-captcha-")
        os.close(fd)
    _atomic_write(image_out, session.image_pgm)
    click.echo(f"challenge image written to {image_out}")
    if not no_ascii:
        click.echo(render_image(session.image, fmt="ascii").decode())
    sk = click.prompt("Strong key (read it from the image)", hide_input=True)
    try:
        payload = vault.decrypt_phase2(session, sk.strip().upper())
    except AuthFailure:
        _fail(EXIT_AUTH, "wrong password or strong key; no output written")
    except PcvError as exc:
        _fail(_exit_code(exc), str(exc))
    _atomic_write(outfile, payload)
    click.echo(f"wrote {outfile}")


@main.command()
@click.option("--temps", default="0.3,0.5,0.7,0.8,0.9,1.0,1.1,1.3,1.6,2.0",
              show_default=True, help="Comma-separated temperatures.")
@click.option("--replicas", default=3, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("-o", "--output", type=click.File("w"), default="-")
def sweep(temps: str, replicas: int, seed: int, output) -> None:
    """Order parameter M versus temperature (CSV)."""
    t_list = [float(t) for t in temps.split(",")]
    result = analysis.sweep_order_parameter(t_list, replicas, seed)
    output.write(result.to_csv())


@main.command()
@click.option("--taus", default="50,100,200,350,400,500", show_default=True,
              help="Comma-separated loopback times (time units).")
@click.option("--seed", default=1, show_default=True)
@click.option("-o", "--output", type=click.File("w"), default="-")
def loopback(taus: str, seed: int, output) -> None:
    """Recovery fidelity versus loopback time tau (CSV + tau_star)."""
    grid = [float(t) for t in taus.split(",")]
    sk = StrongKey("CHAOS", charset_by_id(2))
    profile = analysis.estimate_loopback(lat.SimParams(), seed, grid, sk, seed)
    output.write(profile.to_csv())
    click.echo(f"tau_star: {profile.tau_star}", err=(output is not sys.stdout))


@main.command()
@click.option("--seed", default=1, show_default=True)
@click.option("--horizon", default=200.0, show_default=True,
              help="Measurement horizon (time units).")
def lyapunov(seed: int, horizon: float) -> None:
    """Largest Lyapunov exponent of the operating point."""
    lam = analysis.estimate_lyapunov(lat.SimParams(), seed, horizon=horizon)
    click.echo(f"lambda: {lam:.4f} per time unit")


@main.command()
@click.option("--seed", default=1, show_default=True)
@click.option("--site", default="34,34", show_default=True, help="row,col")
@click.option("--deltas", default="1e-16,1e-12,1e-8,1e-5,1e-3",
              show_default=True, help="Comma-separated perturbations.")
@click.option("-o", "--output", type=click.File("w"), default="-")
def detune(seed: int, site: str, deltas: str, output) -> None:
    """Recovery fidelity after perturbing one stored coordinate (CSV)."""
    params = lat.SimParams()
    sk = StrongKey("CHAOS", charset_by_id(2))
    isk = imprint(lat.thermalize(params, seed), layout_masks(sk, params.n, seed))
    fs = lat.integrate(isk, params.tau_steps)
    reference = lat.sign_field(isk)
    r, c = (int(x) for x in site.split(","))
    output.write("delta,fidelity\n")
    for d in (float(x) for x in deltas.split(",")):
        recovered = analysis.detune_experiment(fs, (r, c), d)
        f = analysis.recovery_fidelity(reference, recovered)
        output.write(f"{d:g},{f:.6f}\n")


@main.command("attack-sim")
@click.argument("container", type=click.Path(exists=True, dir_okay=False))
@click.option("--true-sp", required=True,
              help="The password under test (simulation harness knows it).")
@click.option("--candidates", default=100, show_default=True)
@click.option("--seed", default=1, show_default=True)
@click.option("-o", "--output", type=click.File("w"), default="-")
def attack_sim(container: str, true_sp: str, candidates: int, seed: int,
               output) -> None:
    """Brute-force simulation over a candidate password list (JSONL)."""
    raw = open(container, "rb").read()
    rng = np.random.Generator(np.random.PCG64(seed))
    alphabet = "abcdefghijklmnopqrstuvwxyz0123456789"
    wrong = set()
    while len(wrong) < candidates - 1:
        cand = "".join(rng.choice(list(alphabet))
                       for _ in range(max(len(true_sp), 4)))
        if cand != true_sp:
            wrong.add(cand)
    pool = sorted(wrong)
    pool.insert(int(rng.integers(0, len(pool) + 1)), true_sp)
    try:
        report = attack.brute_force_sim(raw, pool, true_sp)
    except PcvError as exc:
        _fail(_exit_code(exc), str(exc))
    output.write(report.to_jsonl())
    click.echo(f"success: {report.success}  separation: {report.separation:.4f}",
               err=(output is not sys.stdout))


@main.command()
@click.option("--length", default=5, show_default=True)
@click.option("--alphabet", default=80, show_default=True)
@click.option("--rate", default=1000.0, show_default=True,
              help="Recognitions per second (all workers).")
def estimate(length: int, alphabet: int, rate: float) -> None:
    """Brute-force wall-time estimate alphabet^length / rate."""
    try:
        seconds = attack.attack_time_estimate(length, alphabet, rate)
    except ValueError as exc:
        _fail(EXIT_MALFORMED, str(exc))
    click.echo(f"{alphabet}^{length} / {rate:g}/s = {float(seconds):.6g} s "
               f"({attack.humanize_seconds(seconds)})")


@main.command()
@click.argument("text")
@click.option("--seed", default=1, show_default=True,
              help="Seed for thermal background and deformation.")
@click.option("--fmt", type=click.Choice(["pgm", "ascii"]), default="ascii",
              show_default=True)
@click.option("--scale", default=8, show_default=True)
@click.option("-o", "--output", type=click.File("wb"), default="-")
def render(text: str, seed: int, fmt: str, scale: int, output) -> None:
    """Preview TEXT imprinted on a thermalized lattice."""
    params = lat.SimParams()
    charset = charset_by_id(2)
    try:
        mask = layout_masks(text.upper(), params.n, seed)
    except (DoesNotFit, KeyError) as exc:
        _fail(EXIT_MALFORMED, str(exc))
    isk = imprint(lat.thermalize(params, seed), mask)
    output.write(render_image(lat.sign_field(isk), scale=scale, fmt=fmt))
    if fmt == "ascii":
        output.write(b"\n")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8077, show_default=True)
@click.option("--ttl", default=vault.SESSION_TTL, show_default=True,
              help="Decrypt-session lifetime in seconds.")
@click.option("--max-sessions", default=16, show_default=True)
@click.option("--allow-remote", is_flag=True,
              help="Required to bind anything but loopback (secrets in flight).")
def serve(host: str, port: int, ttl: float, max_sessions: int,
          allow_remote: bool) -> None:
    """Run the local HTTP service that backs the web UI."""
    import uvicorn

    from .service import ServiceConfig, create_app

    try:
        config = ServiceConfig(host=host, session_ttl=ttl,
                               max_sessions=max_sessions,
                               allow_remote=allow_remote)
    except ValueError as exc:
        _fail(EXIT_MALFORMED, str(exc))
    uvicorn.run(create_app(config), host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
