import random

import pytest

# one line per acceptance criterion, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from pcv import vault
from pcv.glyphs import DEFAULT_CHARSET, generate_sk
from pcv.lattice import SimParams

# Full lattice (glyph layout needs the width), but short horizons and a
# cheap KDF so crypto-path tests stay fast.  Physics-accuracy tests use
# the real defaults in test_acceptance.py.
FAST_PARAMS = SimParams(burn_in=50.0, tau_steps=2000)
# Long enough (350 t.u., the production horizon) for a wrong password's
# low-bit perturbation (~2^-20, amplified at lambda ~0.05/t.u.) to
# scramble the recovered image; FAST_PARAMS' 20 t.u. is not.
SEP_PARAMS = SimParams(burn_in=50.0, tau_steps=35_000)
FAST_KDF_WORK = 2_000
SP = "correct horse"


def deterministic_entropy():
    return random.Random(99)


@pytest.fixture(scope="session")
def fast_container():
    """(container, sp, sk_text) encrypted with deterministic strong key."""
    container, _ = vault.encrypt_flow(
        b"attack at dawn", SP, params=FAST_PARAMS, kdf_work=FAST_KDF_WORK,
        therm_seed=4200, deform_seed=77, entropy=deterministic_entropy())
    sk = generate_sk(DEFAULT_CHARSET, 5, entropy=deterministic_entropy())
    return container, SP, sk.text


@pytest.fixture(scope="session")
def sep_container():
    """Like fast_container but with a horizon long enough to scramble
    the image under every wrong password."""
    container, _ = vault.encrypt_flow(
        b"attack at dawn", SP, params=SEP_PARAMS, kdf_work=FAST_KDF_WORK,
        therm_seed=4200, deform_seed=77, entropy=deterministic_entropy())
    sk = generate_sk(DEFAULT_CHARSET, 5, entropy=deterministic_entropy())
    return container, SP, sk.text
