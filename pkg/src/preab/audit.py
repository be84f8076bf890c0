"""Randomized audit campaigns over one backend.

An audit samples three kinds of evidence, entirely determined by its
config: a strictness scan of random morphisms, per-condition instances
for the full two-sided catalog (built non-vacuous by construction), and
semi-stability probes of constructed kernels and cokernels.  The tallies
feed a documented decision table that places the backend in a hierarchy
of consistency verdicts; every failing check is shrunk to a small
replayable witness.

Passing verdicts are sampling claims ("no counterexample found"), never
proofs; a recorded failure is a hard fact, witnessed by its instance.

Decision table (after the coverage gate):

    any right.* and any left.* fail          -> preabelian-only
    any right.* fail, left side clean        -> left-only
    any left.* fail, right side clean        -> right-only
    both sides clean, no non-strict sample   -> abelian-consistent
    ... non-strict seen, probes all clean    -> quasi-abelian-consistent
    ... non-strict seen, probe failures or
        no probes configured                 -> semi-abelian-consistent

Coverage gate: every catalog condition needs at least max(1,
min_nonvacuous) non-vacuous samples, and the strictness scan at least as
many samples, otherwise the audit is inconclusive.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

from .backends import get_backend
from .conditions import (
    ALL_CONDITIONS,
    FAIL,
    PASS,
    VACUOUS,
    CheckResult,
    ConditionId,
    MorphismInstance,
    PairInstance,
    ProbeInstance,
    SquareInstance,
    check_condition,
    classify,
    run_check,
)
from .core import Category, ConstraintViolation, Square, cokernel, kernel, pushout
from .linalg import RatMatrix

CONDITION_NAMES = tuple(str(c) for c in ALL_CONDITIONS)
EXTRA_SAMPLE_KEYS = ("strictness", "semistable")
KNOWN_SAMPLE_KEYS = frozenset(CONDITION_NAMES) | set(EXTRA_SAMPLE_KEYS) | {"default"}

VERDICTS = ("abelian-consistent", "quasi-abelian-consistent",
            "semi-abelian-consistent", "left-only", "right-only",
            "preabelian-only", "inconclusive")

WITNESS_CAP = 3  # shrunk witnesses kept per failing check
GENERATION_RETRIES = 5


class GenerationExhausted(Exception):
    """Raised when no non-vacuous instance could be built within the retry budget."""


def _positive_int(value, name, minimum=0):
    if not isinstance(value, int) or isinstance(value, bool) or value < minimum:
        raise ValueError(f"{name} must be an integer >= {minimum}")
    return value


@dataclass(frozen=True)
class AuditConfig:
    """Everything a reproducible audit depends on.

    samples maps a job name (a condition like "right.iii", or
    "strictness" / "semistable") to its sample count; missing names fall
    back to samples["default"].  The semistable count is the number of
    constructed kernels (and, separately, cokernels) to probe, each with
    probe_steps pushout (pullback) samples.
    """

    backend: str
    seed: str = "0"
    dim_bound: int = 3
    samples: dict = field(default_factory=lambda: {"default": 50})
    min_nonvacuous: int = 10
    shrink_budget: int = 200
    probe_steps: int = 25

    def __post_init__(self):
        get_backend(self.backend)
        _positive_int(self.dim_bound, "dim_bound", 1)
        _positive_int(self.min_nonvacuous, "min_nonvacuous")
        _positive_int(self.shrink_budget, "shrink_budget")
        _positive_int(self.probe_steps, "probe_steps")
        if not isinstance(self.samples, dict):
            raise ValueError("samples must be a mapping")
        for key, count in self.samples.items():
            if key not in KNOWN_SAMPLE_KEYS:
                raise ValueError(f"unknown sample key: {key!r}")
            _positive_int(count, f"samples.{key}")

    def sample_count(self, name: str) -> int:
        return self.samples.get(name, self.samples.get("default", 50))

    def to_json(self) -> dict:
        return {"backend": self.backend, "seed": self.seed,
                "dim_bound": self.dim_bound,
                "samples": {k: self.samples[k] for k in sorted(self.samples)},
                "min_nonvacuous": self.min_nonvacuous,
                "shrink_budget": self.shrink_budget,
                "probe_steps": self.probe_steps}

    @classmethod
    def from_json(cls, blob: dict) -> "AuditConfig":
        if not isinstance(blob, dict):
            raise ValueError("config must be a JSON object")
        known = {"backend", "seed", "dim_bound", "samples", "min_nonvacuous",
                 "shrink_budget", "probe_steps"}
        for key in blob:
            if key not in known:
                raise ValueError(f"unknown config key: {key!r}")
        if "backend" not in blob:
            raise ValueError("config needs a backend")
        kwargs = dict(blob)
        if "seed" in kwargs:
            kwargs["seed"] = str(kwargs["seed"])
        return cls(**kwargs)


# ---------------------------------------------------------------------------
# instance generation


def _rand_morphism(cat: Category, rng: random.Random, bound: int):
    a = cat.random_object(rng, bound)
    b = cat.random_object(rng, bound)
    return cat.random_morphism(rng, a, b)


def _rand_kernel_leg(cat: Category, rng: random.Random, bound: int):
    return kernel(_rand_morphism(cat, rng, bound)).leg


def _rand_cokernel_leg(cat: Category, rng: random.Random, bound: int):
    return cokernel(_rand_morphism(cat, rng, bound)).leg


def _generate_right(cat: Category, index: str, rng: random.Random, bound: int):
    """Build an instance for a right-side condition, non-vacuous by design."""
    if index == "i":
        return MorphismInstance(_rand_morphism(cat, rng, bound))
    if index == "ii":
        # split a kernel k through a biproduct: the composite of the two
        # pieces is exactly k, so the hypothesis holds on the nose
        k = _rand_kernel_leg(cat, rng, bound)
        extra = cat.random_object(rng, bound)
        bp = cat.biproduct(k.dom, extra)
        u = cat.random_iso(rng, k.dom)
        inner = bp.inj1 @ u
        spill = cat.random_morphism(rng, extra, k.cod)
        outer = k @ cat.divide_left(u, cat.identity(k.dom)) @ bp.proj1 + spill @ bp.proj2
        return PairInstance(outer=outer, inner=inner)
    if index == "vi":
        h = _rand_kernel_leg(cat, rng, bound)
        l = kernel(cat.random_morphism(rng, h.dom, cat.random_object(rng, bound))).leg
        return PairInstance(outer=h, inner=l)
    if index in ("iii", "iv", "v"):
        k = _rand_kernel_leg(cat, rng, bound)
        if index == "v":
            # a cokernel left edge pushes out to a cokernel right edge
            feed = cat.random_morphism(rng, cat.random_object(rng, bound), k.dom)
            alpha = cokernel(feed).leg
        else:
            alpha = cat.random_morphism(rng, k.dom, cat.random_object(rng, bound))
        return SquareInstance(pushout(alpha, k))
    if index == "vii":
        # strict top edge: cokernel leg, then a split mono, then an iso
        e = _rand_cokernel_leg(cat, rng, bound)
        extra = cat.random_object(rng, bound)
        bp = cat.biproduct(e.cod, extra)
        w = cat.random_iso(rng, bp.ob)
        top = w @ bp.inj1 @ e
        alpha = cat.random_morphism(rng, top.dom, cat.random_object(rng, bound))
        return SquareInstance(pushout(alpha, top))
    raise ValueError(f"unknown condition index: {index!r}")


def generate_instance(backend: str, cond, dim_bound: int, seed):
    """Deterministically build a non-vacuous instance for one condition.

    Retries a few reseeded attempts when a construction degenerates into
    a vacuous instance; raises GenerationExhausted when they all do.
    """
    cond = ConditionId.parse(cond) if isinstance(cond, str) else cond
    base = get_backend(backend)
    cat = base if cond.side == "right" else base.opposite()
    for attempt in range(GENERATION_RETRIES):
        rng = random.Random(f"{seed}:try:{attempt}")
        inst = _generate_right(cat, cond.index, rng, dim_bound)
        if cond.side == "left":
            inst = inst.dualize()
        if check_condition(cond, inst).verdict != VACUOUS:
            return inst
    raise GenerationExhausted(f"no non-vacuous instance for {cond} from seed {seed!r}")


# ---------------------------------------------------------------------------
# shrinking


def instance_size(inst) -> int:
    """Total ambient dimension across the instance's distinct objects."""
    cat = inst.category
    return sum(cat.ambient_dim(p) for p in _plan(inst)[0])


def _plan(inst):
    """Shrink plan: (payloads, matrices, sites, rebuild).

    payloads lists the distinct objects, matrices the raw edge matrices.
    Each site is (payload index, {matrix name: axis}) tying one deletable
    ambient coordinate to the matrix rows/columns it removes.  rebuild
    turns edited payloads and matrices back into an instance, raising on
    anything invalid.
    """
    cat = inst.category

    def build_mor(dom_payload, cod_payload, m):
        f = cat.try_morphism(cat.make_object(dom_payload), cat.make_object(cod_payload), m)
        if f is None:
            raise ConstraintViolation("edited matrix violates structure")
        return f

    if isinstance(inst, MorphismInstance):
        payloads = [inst.f.dom.payload, inst.f.cod.payload]
        mats = {"f": inst.f.payload}
        sites = [(0, {"f": "col"}), (1, {"f": "row"})]

        def rebuild(ps, ms):
            return MorphismInstance(build_mor(ps[0], ps[1], ms["f"]))

        return payloads, mats, sites, rebuild

    if isinstance(inst, PairInstance):
        payloads = [inst.inner.dom.payload, inst.inner.cod.payload, inst.outer.cod.payload]
        mats = {"inner": inst.inner.payload, "outer": inst.outer.payload}
        sites = [(0, {"inner": "col"}),
                 (1, {"inner": "row", "outer": "col"}),
                 (2, {"outer": "row"})]

        def rebuild(ps, ms):
            return PairInstance(outer=build_mor(ps[1], ps[2], ms["outer"]),
                                inner=build_mor(ps[0], ps[1], ms["inner"]))

        return payloads, mats, sites, rebuild

    if isinstance(inst, SquareInstance):
        sq = inst.square
        if sq.provenance == "pushout":
            payloads = [sq.left.dom.payload, sq.left.cod.payload, sq.top.cod.payload]
            mats = {"left": sq.left.payload, "top": sq.top.payload}
            sites = [(0, {"left": "col", "top": "col"}),
                     (1, {"left": "row"}), (2, {"top": "row"})]

            def rebuild(ps, ms):
                return SquareInstance(pushout(build_mor(ps[0], ps[1], ms["left"]),
                                              build_mor(ps[0], ps[2], ms["top"])))

            return payloads, mats, sites, rebuild
        if sq.provenance == "pullback":
            from .core import pullback
            payloads = [sq.bottom.dom.payload, sq.right.dom.payload, sq.bottom.cod.payload]
            mats = {"bottom": sq.bottom.payload, "right": sq.right.payload}
            sites = [(0, {"bottom": "col"}), (1, {"right": "col"}),
                     (2, {"bottom": "row", "right": "row"})]

            def rebuild(ps, ms):
                return SquareInstance(pullback(build_mor(ps[0], ps[2], ms["bottom"]),
                                               build_mor(ps[1], ps[2], ms["right"])))

            return payloads, mats, sites, rebuild
        # hand-built commuting square: all four corners and edges
        payloads = [sq.top.dom.payload, sq.left.cod.payload,
                    sq.top.cod.payload, sq.bottom.cod.payload]
        mats = {"top": sq.top.payload, "left": sq.left.payload,
                "bottom": sq.bottom.payload, "right": sq.right.payload}
        sites = [(0, {"top": "col", "left": "col"}),
                 (1, {"left": "row", "bottom": "col"}),
                 (2, {"top": "row", "right": "col"}),
                 (3, {"bottom": "row", "right": "row"})]

        def rebuild(ps, ms):
            return SquareInstance(Square(
                top=build_mor(ps[0], ps[2], ms["top"]),
                left=build_mor(ps[0], ps[1], ms["left"]),
                bottom=build_mor(ps[1], ps[3], ms["bottom"]),
                right=build_mor(ps[2], ps[3], ms["right"])))

        return payloads, mats, sites, rebuild

    if isinstance(inst, ProbeInstance):
        payloads = [inst.f.dom.payload, inst.f.cod.payload, _probe_other(inst).payload]
        mats = {"f": inst.f.payload, "along": inst.along.payload}
        if inst.role == "kernel":
            sites = [(0, {"f": "col", "along": "col"}),
                     (1, {"f": "row"}), (2, {"along": "row"})]
        else:
            sites = [(0, {"f": "col"}),
                     (1, {"f": "row", "along": "row"}), (2, {"along": "col"})]
        role = inst.role

        def rebuild(ps, ms):
            f = build_mor(ps[0], ps[1], ms["f"])
            if role == "kernel":
                along = build_mor(ps[0], ps[2], ms["along"])
            else:
                along = build_mor(ps[2], ps[1], ms["along"])
            return ProbeInstance(role=role, f=f, along=along)

        return payloads, mats, sites, rebuild

    raise ValueError(f"cannot shrink instance of type {type(inst).__name__}")


def _probe_other(inst: ProbeInstance):
    return inst.along.cod if inst.role == "kernel" else inst.along.dom


def _delete_axis(m: RatMatrix, axis: str, j: int) -> RatMatrix:
    return m.delete_column(j) if axis == "col" else m.delete_row(j)


def shrink(result: CheckResult, budget: int = 200) -> tuple[CheckResult, int]:
    """Greedily minimize a failing check's instance.

    Moves, in order: delete an ambient coordinate anywhere in the
    instance; zero a matrix entry; replace a remaining entry by +-1.
    A move is kept only when the edited instance still fails the same
    check.  Returns the minimized result and the number of checker
    invocations spent; budget caps those invocations.
    """
    if result.verdict != FAIL:
        raise ValueError("only failing results can be shrunk")
    check = result.check
    current = result
    spent = 0

    def attempt(candidate_builder):
        nonlocal spent
        if spent >= budget:
            return None
        try:
            inst = candidate_builder()
        except (ConstraintViolation, ValueError, RuntimeError):
            return None
        spent += 1
        try:
            res = run_check(check, inst)
        except (ConstraintViolation, ValueError, RuntimeError):
            return None
        return res if res.verdict == FAIL else None

    # pass 1: coordinate deletion, restarting after every success
    progress = True
    while progress and spent < budget:
        progress = False
        payloads, mats, sites, rebuild = _plan(current.instance)
        cat = current.instance.category
        for obj_idx, touched in sites:
            dim = cat.ambient_dim(payloads[obj_idx])
            for j in range(dim):
                def candidate(obj_idx=obj_idx, touched=touched, j=j):
                    ps = list(payloads)
                    ps[obj_idx] = cat.drop_coordinate(ps[obj_idx], j)
                    ms = {name: (_delete_axis(mat, touched[name], j)
                                 if name in touched else mat)
                          for name, mat in mats.items()}
                    return rebuild(ps, ms)
                res = attempt(candidate)
                if res is not None:
                    current = res
                    progress = True
                    break
            if progress:
                break

    # pass 2: entry zeroing, then pass 3: entry flattening to +-1
    for target in (None, "unit"):
        payloads, mats, sites, rebuild = _plan(current.instance)
        for name in sorted(mats):
            m = mats[name]
            for i in range(m.rows):
                for j in range(m.cols):
                    e = m.entry(i, j)
                    if e == 0:
                        continue
                    new = 0 if target is None else (1 if e > 0 else -1)
                    if e == new:
                        continue

                    def candidate(name=name, i=i, j=j, new=new):
                        ms = dict(mats)
                        ms[name] = ms[name].with_entry(i, j, new)
                        return rebuild(list(payloads), ms)

                    res = attempt(candidate)
                    if res is not None:
                        current = res
                        payloads, mats, sites, rebuild = _plan(current.instance)
                        m = mats[name]
    return current, spent


# ---------------------------------------------------------------------------
# the audit itself


@dataclass(frozen=True)
class AuditReport:
    """Tallies, witnesses and the verdict of one audit run."""

    config: AuditConfig
    tallies: dict
    strictness: dict
    semistability: dict
    witnesses: tuple
    verdict: str
    caveats: tuple

    def to_json(self) -> dict:
        return {"backend": self.config.backend,
                "verdict": self.verdict,
                "caveats": list(self.caveats),
                "tallies": {k: dict(v) for k, v in sorted(self.tallies.items())},
                "strictness": dict(self.strictness),
                "semistability": {k: dict(v) for k, v in sorted(self.semistability.items())},
                "witnesses": [dict(w) for w in self.witnesses]}


def _evaluate_condition_job(backend, cond_name, dim_bound, seed):
    try:
        inst = generate_instance(backend, cond_name, dim_bound, seed)
    except GenerationExhausted:
        return ("exhausted", None)
    res = check_condition(cond_name, inst)
    return (res.verdict, res)


def _evaluate_strictness_job(backend, dim_bound, seed):
    cat = get_backend(backend)
    rng = random.Random(seed)
    f = _rand_morphism(cat, rng, dim_bound)
    flags = classify(f)
    return (flags.strict, MorphismInstance(f), flags)


def _evaluate_probe_job(backend, role, dim_bound, probe_steps, seed):
    from .conditions import probe_semistable
    cat = get_backend(backend)
    rng = random.Random(f"{seed}:pick")
    if role == "kernel":
        probed = _rand_kernel_leg(cat, rng, dim_bound)
    else:
        probed = _rand_cokernel_leg(cat, rng, dim_bound)
    return probe_semistable(probed, role, probe_steps, seed, dim_bound=dim_bound)


def run_audit(cfg: AuditConfig, workers: int = 1) -> AuditReport:
    """Run a full audit; a pure function of cfg regardless of workers."""
    _positive_int(workers, "workers", 1)
    backend = cfg.backend

    jobs = []
    for cond_name in CONDITION_NAMES:
        for i in range(cfg.sample_count(cond_name)):
            seed = f"{cfg.seed}:{cond_name}:{i}"
            jobs.append(("condition", cond_name,
                         lambda c=cond_name, s=seed: _evaluate_condition_job(
                             backend, c, cfg.dim_bound, s)))
    for i in range(cfg.sample_count("strictness")):
        seed = f"{cfg.seed}:strictness:{i}"
        jobs.append(("strictness", None,
                     lambda s=seed: _evaluate_strictness_job(backend, cfg.dim_bound, s)))
    for role in ("kernel", "cokernel"):
        for i in range(cfg.sample_count("semistable")):
            seed = f"{cfg.seed}:semistable:{role}:{i}"
            jobs.append(("probe", role,
                         lambda r=role, s=seed: _evaluate_probe_job(
                             backend, r, cfg.dim_bound, cfg.probe_steps, s)))

    if workers == 1:
        outcomes = [fn() for _, _, fn in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(lambda job: job[2](), jobs))

    # deterministic fold in job order
    tallies = {name: {"pass": 0, "fail": 0, "vacuous": 0, "exhausted": 0}
               for name in CONDITION_NAMES}
    failures = {name: [] for name in CONDITION_NAMES}
    strict_tally = {"samples": 0, "strict": 0, "non_strict": 0, "non_strict_example": None}
    probe_tally = {role: {"probes": 0, "clean": 0, "failures": 0}
                   for role in ("kernel", "cokernel")}
    probe_failures = []

    for (kind, tag, _), outcome in zip(jobs, outcomes):
        if kind == "condition":
            verdict, res = outcome
            tallies[tag][verdict] += 1
            if verdict == FAIL and len(failures[tag]) < WITNESS_CAP:
                failures[tag].append(res)
        elif kind == "strictness":
            strict, inst, flags = outcome
            strict_tally["samples"] += 1
            if strict:
                strict_tally["strict"] += 1
            else:
                strict_tally["non_strict"] += 1
                if strict_tally["non_strict_example"] is None:
                    strict_tally["non_strict_example"] = {
                        "instance": inst.to_json(), "flags": flags.to_json()}
        else:
            res = outcome
            probe_tally[tag]["probes"] += 1
            if res.verdict == PASS:
                probe_tally[tag]["clean"] += 1
            else:
                probe_tally[tag]["failures"] += 1
                if len(probe_failures) < WITNESS_CAP:
                    probe_failures.append((tag, res))

    witnesses = []
    for cond_name in CONDITION_NAMES:
        for res in failures[cond_name]:
            small, spent = shrink(res, cfg.shrink_budget)
            witnesses.append({"check": cond_name,
                              "result": small.to_json(),
                              "original_instance": res.instance.to_json(),
                              "shrink_checks_used": spent})
    for role, res in probe_failures:
        small, spent = shrink(res, cfg.shrink_budget)
        witnesses.append({"check": "semistable",
                          "role": role,
                          "result": small.to_json(),
                          "original_instance": res.instance.to_json(),
                          "shrink_checks_used": spent})

    verdict = decide_verdict(cfg, tallies, strict_tally, probe_tally)
    caveats = _caveats(tallies, strict_tally, probe_tally)
    return AuditReport(config=cfg, tallies=tallies, strictness=strict_tally,
                       semistability=probe_tally, witnesses=tuple(witnesses),
                       verdict=verdict, caveats=caveats)


def _coverage_ok(cfg: AuditConfig, tallies, strict_tally) -> bool:
    floor = max(1, cfg.min_nonvacuous)
    if strict_tally["samples"] < floor:
        return False
    for name in CONDITION_NAMES:
        t = tallies[name]
        if t["pass"] + t["fail"] < floor:
            return False
    return True


def decide_verdict(cfg: AuditConfig, tallies, strict_tally, probe_tally) -> str:
    """Apply the decision table documented in the module docstring."""
    if not _coverage_ok(cfg, tallies, strict_tally):
        return "inconclusive"
    right_fail = any(tallies[f"right.{c.index}"]["fail"] for c in ALL_CONDITIONS
                     if c.side == "right")
    left_fail = any(tallies[f"left.{c.index}"]["fail"] for c in ALL_CONDITIONS
                    if c.side == "left")
    if right_fail and left_fail:
        return "preabelian-only"
    if right_fail:
        return "left-only"
    if left_fail:
        return "right-only"
    if strict_tally["non_strict"] == 0:
        return "abelian-consistent"
    probes = sum(probe_tally[r]["probes"] for r in probe_tally)
    probe_failures = sum(probe_tally[r]["failures"] for r in probe_tally)
    if probes > 0 and probe_failures == 0:
        return "quasi-abelian-consistent"
    return "semi-abelian-consistent"


def _caveats(tallies, strict_tally, probe_tally) -> tuple:
    out = ["passing-verdicts-are-sampling-claims-not-proofs"]
    probes = sum(probe_tally[r]["probes"] for r in probe_tally)
    if probes > 0:
        out.append("semistability-probes-are-falsification-only")
    elif strict_tally["non_strict"]:
        out.append("semistability-unprobed")
    for name in CONDITION_NAMES:
        n = tallies[name]["exhausted"]
        if n:
            out.append(f"generation-exhausted:{name}:{n}")
    return tuple(out)
