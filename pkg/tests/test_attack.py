import json
from fractions import Fraction

import numpy as np
import pytest

from pcv import attack, lattice as lat, vault
from pcv.attack import (attack_time_estimate, brute_force_sim,
                        humanize_seconds, template_oracle)
from pcv.glyphs import (DEFAULT_CHARSET, FULL_CHARSET, StrongKey, imprint,
                        layout_masks)
from pcv.lattice import SimParams

from conftest import SP


class TestTemplateOracle:
    def test_clean_imprint_decodes_exactly(self):
        state = lat.thermalize(SimParams(burn_in=30.0), 12)
        sk = StrongKey("KM4TX")
        isk = imprint(state, layout_masks(sk, 69, deform_seed=8))
        text, score = template_oracle(lat.sign_field(isk), DEFAULT_CHARSET, 5)
        assert text == "KM4TX"
        assert score > 0.5

    def test_random_field_scores_low(self):
        rng = np.random.Generator(np.random.PCG64(0))
        bits = rng.random((69, 69)) > 0.5
        _, score = template_oracle(bits, DEFAULT_CHARSET, 5)
        assert score < 0.5

    def test_full_charset_supported(self):
        state = lat.thermalize(SimParams(burn_in=30.0), 13)
        sk = StrongKey("CHAOS", FULL_CHARSET)
        isk = imprint(state, layout_masks(sk, 69, deform_seed=9))
        text, _ = template_oracle(lat.sign_field(isk), FULL_CHARSET, 5)
        assert text == "CHAOS"

    def test_deterministic(self):
        rng = np.random.Generator(np.random.PCG64(1))
        bits = rng.random((69, 69)) > 0.5
        assert (template_oracle(bits, DEFAULT_CHARSET, 5) ==
                template_oracle(bits, DEFAULT_CHARSET, 5))


class TestBruteForceSim:
    def test_small_pool_succeeds_and_separates(self, sep_container):
        container, sp, sk = sep_container
        pool = ["hunter2", sp, "password1", "letmein9"]
        report = brute_force_sim(container, pool, sp)
        assert report.success
        assert report.tried == 4
        assert report.separation > 0.0
        assert report.true_score() > report.threshold
        top = max(report.candidates, key=lambda c: c.score)
        assert top.password == sp and top.decoded == sk

    def test_jsonl_output(self, fast_container):
        container, sp, _ = fast_container
        report = brute_force_sim(container, [sp, "nope"], sp)
        lines = [json.loads(l) for l in report.to_jsonl().splitlines()]
        assert len(lines) == 3
        assert lines[-1]["summary"] is True
        assert {l["password"] for l in lines[:-1]} == {sp, "nope"}

    def test_true_password_required(self, fast_container):
        container, sp, _ = fast_container
        with pytest.raises(ValueError):
            brute_force_sim(container, ["a", "b"], sp)

    def test_pool_cap(self, fast_container):
        container, sp, _ = fast_container
        with pytest.raises(ValueError):
            brute_force_sim(container, [sp] + ["x"] * 10_000, sp)


class TestTimeEstimate:
    def test_reference_figure(self):
        est = attack_time_estimate(5, alphabet=80, rate=1000.0)
        assert est == Fraction(80 ** 5, 1000)
        assert float(est) == 3.2768e6
        assert humanize_seconds(est) == "≈ 37.9 days"

    def test_exact_big_numbers(self):
        est = attack_time_estimate(20, alphabet=80, rate=1000.0)
        assert est == Fraction(80) ** 20 / 1000

    def test_validation(self):
        with pytest.raises(ValueError):
            attack_time_estimate(0)
        with pytest.raises(ValueError):
            attack_time_estimate(5, rate=0.0)

    def test_humanize_units(self):
        assert humanize_seconds(30) == "≈ 30.0 s"
        assert humanize_seconds(1800) == "≈ 30.0 minutes"
        assert humanize_seconds(7200) == "≈ 2.0 hours"
        assert humanize_seconds(86400 * 400) == "≈ 1.1 years"
