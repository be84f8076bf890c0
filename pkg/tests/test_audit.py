"""Audit engine: config validation, generation, shrinking, verdicts.

Condition failures are unreachable through honest construction on the
registered backends, so the witness pipeline is exercised by injecting
synthetic failures (mislabeled squares, fabricated probe results) into
the generation layer.
"""

import json

import pytest

from preab import BACKENDS
from preab.audit import (
    CONDITION_NAMES,
    GENERATION_RETRIES,
    WITNESS_CAP,
    AuditConfig,
    AuditReport,
    GenerationExhausted,
    decide_verdict,
    generate_instance,
    instance_size,
    run_audit,
    shrink,
)
from preab.backends import get_backend
from preab.conditions import (
    CheckResult,
    MorphismInstance,
    ProbeInstance,
    SquareInstance,
    check_condition,
    instance_from_json,
    run_check,
)
from preab.core import Square, classify, kernel
from preab.linalg import RatMatrix, Subspace

import preab.audit as audit_module

BACKEND_NAMES = sorted(BACKENDS)

SMALL = dict(seed="audit-tests", dim_bound=3,
             samples={"default": 6, "strictness": 40, "semistable": 2},
             min_nonvacuous=3, probe_steps=5)


def small_config(backend, **overrides):
    kwargs = {**SMALL, **overrides}
    return AuditConfig(backend=backend, **kwargs)


# ---------------------------------------------------------------------------
# config


class TestAuditConfig:
    def test_defaults(self):
        cfg = AuditConfig(backend="vectq")
        assert cfg.seed == "0"
        assert cfg.dim_bound == 3
        assert cfg.sample_count("right.iii") == 50
        assert cfg.sample_count("strictness") == 50

    def test_sample_count_fallback(self):
        cfg = AuditConfig(backend="vectq",
                          samples={"default": 7, "right.ii": 2, "semistable": 1})
        assert cfg.sample_count("right.ii") == 2
        assert cfg.sample_count("left.ii") == 7
        assert cfg.sample_count("semistable") == 1

    def test_unknown_backend_rejected(self):
        with pytest.raises(ValueError):
            AuditConfig(backend="setoids")

    @pytest.mark.parametrize("kwargs", [
        dict(dim_bound=0),
        dict(dim_bound="3"),
        dict(min_nonvacuous=-1),
        dict(shrink_budget=True),
        dict(probe_steps=-2),
        dict(samples=[50]),
        dict(samples={"default": -1}),
        dict(samples={"right.viii": 5}),
        dict(samples={"sideways.ii": 5}),
    ])
    def test_bad_fields_rejected(self, kwargs):
        with pytest.raises(ValueError):
            AuditConfig(backend="vectq", **kwargs)

    def test_json_round_trip(self):
        cfg = small_config("subvect")
        again = AuditConfig.from_json(json.loads(json.dumps(cfg.to_json())))
        assert again == cfg

    def test_from_json_requires_backend(self):
        with pytest.raises(ValueError):
            AuditConfig.from_json({"seed": "x"})

    def test_from_json_rejects_unknown_keys(self):
        with pytest.raises(ValueError):
            AuditConfig.from_json({"backend": "vectq", "retries": 3})

    def test_from_json_rejects_non_object(self):
        with pytest.raises(ValueError):
            AuditConfig.from_json([1, 2])

    def test_from_json_coerces_seed_to_string(self):
        cfg = AuditConfig.from_json({"backend": "vectq", "seed": 17})
        assert cfg.seed == "17"


# ---------------------------------------------------------------------------
# instance generation


class TestGeneration:
    @pytest.mark.parametrize("backend", BACKEND_NAMES)
    @pytest.mark.parametrize("cond", CONDITION_NAMES)
    def test_generated_instances_are_non_vacuous(self, backend, cond):
        inst = generate_instance(backend, cond, 3, "gen-tests")
        assert check_condition(cond, inst).verdict in ("pass", "fail")

    @pytest.mark.parametrize("backend", BACKEND_NAMES)
    @pytest.mark.parametrize("cond", CONDITION_NAMES)
    def test_generated_instances_round_trip(self, backend, cond):
        inst = generate_instance(backend, cond, 3, "gen-tests")
        blob = json.loads(json.dumps(inst.to_json()))
        assert instance_from_json(blob).to_json() == inst.to_json()

    def test_generation_is_deterministic(self):
        a = generate_instance("subvect", "right.iii", 3, "repeat")
        b = generate_instance("subvect", "right.iii", 3, "repeat")
        c = generate_instance("subvect", "right.iii", 3, "other")
        assert a.to_json() == b.to_json()
        assert c.to_json() != a.to_json()

    def test_instance_size_sums_ambient_dims(self):
        cat = get_backend("vectq")
        f = cat.make_morphism(cat.make_object((2, ())), cat.make_object((3, ())),
                              RatMatrix.zeros(3, 2))
        assert instance_size(MorphismInstance(f)) == 5


# ---------------------------------------------------------------------------
# shrinking


def subvect_witness(ambient):
    cat = get_backend("subvect")
    dom = cat.make_object((ambient, (Subspace.zero(ambient),)))
    cod = cat.make_object((ambient, (Subspace.full(ambient),)))
    return cat.make_morphism(dom, cod, RatMatrix.identity(ambient))


class TestShrink:
    def test_padded_inclusion_witness_shrinks_to_a_line(self):
        res = run_check("strict", MorphismInstance(subvect_witness(2)))
        assert res.verdict == "fail"
        small, spent = shrink(res)
        assert spent == 6
        assert small.verdict == "fail"
        assert small.instance.to_json() == {
            "kind": "morphism", "backend": "subvect",
            "morphism": {
                "backend": "subvect",
                "dom": {"dim": 1, "subspace": {"rows": 1, "cols": 0, "entries": [[]]}},
                "cod": {"dim": 1, "subspace": {"rows": 1, "cols": 1, "entries": [["1"]]}},
                "matrix": {"rows": 1, "cols": 1, "entries": [["1"]]}}}

    def test_lattice_witness_shrinks_to_doubling(self):
        cat = get_backend("latz")
        f = cat.make_morphism(cat.make_object(3), cat.make_object(3),
                              RatMatrix.from_rows([[2, 0, 0], [0, 1, 0], [0, 0, 1]]))
        res = run_check("strict", MorphismInstance(f))
        assert res.verdict == "fail"
        small, spent = shrink(res)
        assert instance_size(small.instance) == 2
        assert small.instance.to_json()["morphism"]["matrix"]["entries"] == [["2"]]
        assert spent == 14

    def test_budget_caps_checker_invocations(self):
        cat = get_backend("latz")
        f = cat.make_morphism(cat.make_object(3), cat.make_object(3),
                              RatMatrix.from_rows([[2, 0, 0], [0, 1, 0], [0, 0, 1]]))
        res = run_check("strict", MorphismInstance(f))
        small, spent = shrink(res, budget=3)
        assert spent <= 3
        assert small.verdict == "fail"

    def test_only_failures_shrink(self):
        cat = get_backend("vectq")
        f = cat.make_morphism(cat.make_object((1, ())), cat.make_object((1, ())),
                              RatMatrix.identity(1))
        res = run_check("strict", MorphismInstance(f))
        assert res.verdict == "pass"
        with pytest.raises(ValueError):
            shrink(res)

    def test_shrunk_witness_replays_from_json(self):
        res = run_check("strict", MorphismInstance(subvect_witness(3)))
        small, _ = shrink(res)
        replayed = instance_from_json(json.loads(json.dumps(small.instance.to_json())))
        assert run_check("strict", replayed).verdict == "fail"


# ---------------------------------------------------------------------------
# full runs on the registered backends


class TestRunAudit:
    @pytest.mark.parametrize("backend,verdict,non_strict", [
        ("vectq", "abelian-consistent", 0),
        ("subvect", "quasi-abelian-consistent", 5),
        ("filtvect3", "quasi-abelian-consistent", 7),
        ("latz", "quasi-abelian-consistent", 4),
    ])
    def test_zoo_verdicts(self, backend, verdict, non_strict):
        rep = run_audit(small_config(backend))
        assert rep.verdict == verdict
        assert rep.witnesses == ()
        assert rep.strictness["non_strict"] == non_strict
        assert rep.strictness["samples"] == 40
        for name in CONDITION_NAMES:
            t = rep.tallies[name]
            assert t["fail"] == 0
            assert t["pass"] >= 3
        for role in ("kernel", "cokernel"):
            assert rep.semistability[role] == {"probes": 2, "clean": 2, "failures": 0}

    def test_reports_are_deterministic(self):
        cfg = small_config("subvect")
        assert run_audit(cfg).to_json() == run_audit(cfg).to_json()

    def test_workers_never_change_the_report(self):
        cfg = small_config("filtvect3")
        assert run_audit(cfg, workers=1).to_json() == run_audit(cfg, workers=3).to_json()

    def test_worker_count_must_be_positive(self):
        with pytest.raises(ValueError):
            run_audit(small_config("vectq"), workers=0)

    def test_insufficient_coverage_is_inconclusive(self):
        cfg = AuditConfig(backend="vectq", seed="thin",
                          samples={"default": 2, "semistable": 1},
                          min_nonvacuous=5, probe_steps=2)
        rep = run_audit(cfg)
        assert rep.verdict == "inconclusive"

    def test_non_strict_example_is_recorded(self):
        rep = run_audit(small_config("subvect"))
        example = rep.strictness["non_strict_example"]
        assert not example["flags"]["strict"]
        inst = instance_from_json(example["instance"])
        assert run_check("strict", inst).verdict == "fail"

    def test_probe_caveats(self):
        rep = run_audit(small_config("subvect"))
        assert "passing-verdicts-are-sampling-claims-not-proofs" in rep.caveats
        assert "semistability-probes-are-falsification-only" in rep.caveats
        unprobed = run_audit(small_config(
            "subvect", samples={"default": 4, "strictness": 40, "semistable": 0},
            min_nonvacuous=2))
        assert unprobed.verdict == "semi-abelian-consistent"
        assert "semistability-unprobed" in unprobed.caveats

    def test_report_json_shape(self):
        rep = run_audit(small_config("vectq"))
        blob = rep.to_json()
        assert set(blob) == {"backend", "verdict", "caveats", "tallies",
                             "strictness", "semistability", "witnesses"}
        assert set(blob["tallies"]) == set(CONDITION_NAMES)
        assert all(set(t) == {"pass", "fail", "vacuous", "exhausted"}
                   for t in blob["tallies"].values())


# ---------------------------------------------------------------------------
# synthetic failure injection


def lying_pushout_square():
    """A commuting square mislabeled as a pushout; its top is a kernel."""
    cat = get_backend("vectq")
    z = cat.make_object((0, ()))
    q = cat.make_object((1, ()))
    return Square(top=cat.make_morphism(z, q, RatMatrix.zeros(1, 0)),
                  left=cat.make_morphism(z, q, RatMatrix.zeros(1, 0)),
                  bottom=cat.make_morphism(q, q, RatMatrix.identity(1)),
                  right=cat.make_morphism(q, q, RatMatrix.zeros(1, 1)),
                  provenance="pushout")


class TestFailureInjection:
    def test_condition_failures_become_shrunk_witnesses(self, monkeypatch):
        real = generate_instance

        def planted(backend, cond, dim_bound, seed):
            if cond == "right.iii":
                return SquareInstance(lying_pushout_square())
            return real(backend, cond, dim_bound, seed)

        monkeypatch.setattr(audit_module, "generate_instance", planted)
        rep = run_audit(small_config("vectq"))
        assert rep.verdict == "left-only"
        assert rep.tallies["right.iii"]["fail"] == 6
        assert len(rep.witnesses) == WITNESS_CAP
        for entry in rep.witnesses:
            assert entry["check"] == "right.iii"
            assert entry["result"]["verdict"] == "fail"
            assert entry["result"]["witness"]["reason"] == "pushout-square-not-pullback"
            # serialization keeps only the generating cospan, so replaying a
            # mislabeled square rebuilds the honest pushout, which passes;
            # honestly generated squares rebuild identically instead
            replayed = instance_from_json(entry["result"]["instance"])
            assert run_check("right.iii", replayed).verdict == "pass"

    def test_exhausted_generation_is_reported(self, monkeypatch):
        real = generate_instance

        def starved(backend, cond, dim_bound, seed):
            if cond == "left.vii":
                raise GenerationExhausted(cond)
            return real(backend, cond, dim_bound, seed)

        monkeypatch.setattr(audit_module, "generate_instance", starved)
        rep = run_audit(small_config("vectq"))
        assert rep.verdict == "inconclusive"
        assert rep.tallies["left.vii"] == {"pass": 0, "fail": 0, "vacuous": 0,
                                           "exhausted": 6}
        assert "generation-exhausted:left.vii:6" in rep.caveats

    def test_probe_failures_carry_their_role(self, monkeypatch):
        cat = get_backend("subvect")

        a = cat.make_object((2, (Subspace.full(2),)))
        b = cat.make_object((1, (Subspace.full(1),)))
        p = cat.make_morphism(a, b, RatMatrix.from_rows([[1, 0]]))
        k = kernel(p).leg

        def fabricated(backend, role, dim_bound, probe_steps, seed):
            inst = ProbeInstance(role="kernel", f=k, along=cat.identity(k.dom))
            return CheckResult(check="semistable", verdict="fail", instance=inst,
                               witness={"reason": "synthetic"})

        monkeypatch.setattr(audit_module, "_evaluate_probe_job", fabricated)
        rep = run_audit(small_config("subvect"))
        assert rep.semistability["kernel"]["failures"] == 2
        roles = [w["role"] for w in rep.witnesses if w["check"] == "semistable"]
        assert roles and set(roles) <= {"kernel", "cokernel"}
        assert rep.witnesses  # exit-code-2 territory for the CLI


# ---------------------------------------------------------------------------
# verdict decision table


def clean_tallies(n=5):
    return {name: {"pass": n, "fail": 0, "vacuous": 0, "exhausted": 0}
            for name in CONDITION_NAMES}


def strict_tally(samples=5, non_strict=0):
    return {"samples": samples, "strict": samples - non_strict,
            "non_strict": non_strict, "non_strict_example": None}


def probe_tally(probes=2, kernel_failures=0):
    return {"kernel": {"probes": probes, "clean": probes - kernel_failures,
                       "failures": kernel_failures},
            "cokernel": {"probes": probes, "clean": probes, "failures": 0}}


class TestDecideVerdict:
    CFG = AuditConfig(backend="vectq", min_nonvacuous=3)

    def test_all_strict_is_abelian_consistent(self):
        assert decide_verdict(self.CFG, clean_tallies(), strict_tally(),
                              probe_tally()) == "abelian-consistent"

    def test_non_strict_with_clean_probes_is_quasi_abelian(self):
        assert decide_verdict(self.CFG, clean_tallies(), strict_tally(non_strict=2),
                              probe_tally()) == "quasi-abelian-consistent"

    def test_non_strict_without_probes_is_semi_abelian(self):
        assert decide_verdict(self.CFG, clean_tallies(), strict_tally(non_strict=2),
                              probe_tally(probes=0)) == "semi-abelian-consistent"

    def test_probe_failure_blocks_quasi_abelian(self):
        assert decide_verdict(self.CFG, clean_tallies(), strict_tally(non_strict=2),
                              probe_tally(kernel_failures=1)) == "semi-abelian-consistent"

    def test_right_failure_leaves_left_only(self):
        t = clean_tallies()
        t["right.iv"]["fail"] = 1
        assert decide_verdict(self.CFG, t, strict_tally(), probe_tally()) == "left-only"

    def test_left_failure_leaves_right_only(self):
        t = clean_tallies()
        t["left.ii"]["fail"] = 1
        assert decide_verdict(self.CFG, t, strict_tally(), probe_tally()) == "right-only"

    def test_two_sided_failure_is_preabelian_only(self):
        t = clean_tallies()
        t["right.i"]["fail"] = 1
        t["left.vi"]["fail"] = 1
        assert decide_verdict(self.CFG, t, strict_tally(),
                              probe_tally()) == "preabelian-only"

    def test_thin_condition_coverage_is_inconclusive(self):
        t = clean_tallies()
        t["left.iii"] = {"pass": 1, "fail": 0, "vacuous": 4, "exhausted": 0}
        assert decide_verdict(self.CFG, t, strict_tally(),
                              probe_tally()) == "inconclusive"

    def test_thin_strictness_coverage_is_inconclusive(self):
        assert decide_verdict(self.CFG, clean_tallies(), strict_tally(samples=2),
                              probe_tally()) == "inconclusive"

    def test_failures_count_toward_coverage(self):
        t = clean_tallies()
        t["right.vii"] = {"pass": 2, "fail": 1, "vacuous": 2, "exhausted": 0}
        assert decide_verdict(self.CFG, t, strict_tally(), probe_tally()) == "left-only"
