"""Per-instance checkers for the exactness-condition catalog.

The catalog has two sides of seven conditions each.  The right-side
conditions say, in various ways, that kernels survive composition and
pushouts; the left-side conditions are their mirror images for cokernels
and pullbacks, and are evaluated by running the matching right-side
checker in the opposite category.  Alongside the catalog there are
unconditional checks on the middle arrow of the canonical decomposition,
two composite-cone identities, an image-slide law and a sampling probe
for semi-stability.

Checkers are pure.  Each returns a CheckResult whose instance payload
serializes to JSON, so any failure can be replayed exactly.

Right-side catalog (left side is the mirror statement):

    i    the middle arrow of every canonical decomposition is epi
    ii   if outer @ inner arises as a kernel, so does inner
    iii  a pushout square whose top edge is a kernel is also a pullback
    iv   in such a square the bottom edge is mono
    v    as iv, additionally requiring the right edge to be a cokernel
    vi   the composite of two kernels is a kernel
    vii  a pushout square whose top edge is strict induces an epi
         comparison between the kernels of its vertical edges
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .backends import get_backend
from .core import (
    Morphism,
    Opposite,
    Square,
    classify,
    cokernel,
    decompose,
    dualize,
    dualize_square,
    induced_kernel_map,
    is_pullback,
    is_pushout,
    kernel,
    pullback,
    pullback_mediator,
    pushout,
    quotient_iso,
    subobject_iso,
)

PASS = "pass"
FAIL = "fail"
VACUOUS = "vacuous"

SIDES = ("right", "left")
INDICES = ("i", "ii", "iii", "iv", "v", "vi", "vii")
# conditions with an applicability hypothesis; only these can be vacuous
CONDITIONAL_INDICES = ("ii", "iii", "iv", "v", "vi", "vii")


@dataclass(frozen=True)
class ConditionId:
    """One entry of the two-sided condition catalog, e.g. right.iii."""

    side: str
    index: str

    def __post_init__(self):
        if self.side not in SIDES:
            raise ValueError(f"unknown condition side: {self.side!r}")
        if self.index not in INDICES:
            raise ValueError(f"unknown condition index: {self.index!r}")

    def __str__(self):
        return f"{self.side}.{self.index}"

    @classmethod
    def parse(cls, text: str) -> "ConditionId":
        side, sep, index = str(text).partition(".")
        if not sep:
            raise ValueError(f"condition must look like 'right.iii', got {text!r}")
        return cls(side, index)


ALL_CONDITIONS = tuple(ConditionId(s, i) for s in SIDES for i in INDICES)


# ---------------------------------------------------------------------------
# instances


def _backend_name(category) -> str:
    if isinstance(category, Opposite):
        raise ValueError("opposite-category instances do not serialize; "
                         "serialize the base-side instance instead")
    return category.name


def _mor_json(f: Morphism) -> dict:
    return f.category.morphism_to_json(f)


@dataclass(frozen=True)
class MorphismInstance:
    """A single morphism."""

    f: Morphism
    kind = "morphism"

    @property
    def category(self):
        return self.f.category

    def dualize(self) -> "MorphismInstance":
        return MorphismInstance(dualize(self.f))

    def to_json(self) -> dict:
        return {"kind": self.kind, "backend": _backend_name(self.category),
                "morphism": _mor_json(self.f)}


@dataclass(frozen=True)
class PairInstance:
    """A composable pair; the composite is outer @ inner."""

    outer: Morphism
    inner: Morphism
    kind = "pair"

    def __post_init__(self):
        if self.inner.category is not self.outer.category:
            raise ValueError("pair members live in different categories")
        if self.inner.cod != self.outer.dom:
            raise ValueError("pair is not composable")

    @property
    def category(self):
        return self.outer.category

    @property
    def composite(self) -> Morphism:
        return self.outer @ self.inner

    def dualize(self) -> "PairInstance":
        return PairInstance(outer=dualize(self.inner), inner=dualize(self.outer))

    def to_json(self) -> dict:
        return {"kind": self.kind, "backend": _backend_name(self.category),
                "outer": _mor_json(self.outer), "inner": _mor_json(self.inner)}


@dataclass(frozen=True)
class SquareInstance:
    """A commutative square, usually a constructed pushout or pullback.

    Pushout squares serialize by their generating span (left and top
    edges) and pullback squares by their generating cospan, so replay
    rebuilds the identical canonical square.
    """

    square: Square
    kind = "square"

    @property
    def category(self):
        return self.square.top.category

    def dualize(self) -> "SquareInstance":
        return SquareInstance(dualize_square(self.square))

    def to_json(self) -> dict:
        sq = self.square
        blob = {"kind": self.kind, "backend": _backend_name(self.category),
                "provenance": sq.provenance}
        if sq.provenance == "pushout":
            blob["left"] = _mor_json(sq.left)
            blob["top"] = _mor_json(sq.top)
        elif sq.provenance == "pullback":
            blob["bottom"] = _mor_json(sq.bottom)
            blob["right"] = _mor_json(sq.right)
        else:
            for edge in ("top", "left", "bottom", "right"):
                blob[edge] = _mor_json(getattr(sq, edge))
        return blob


@dataclass(frozen=True)
class ProbeInstance:
    """One semi-stability sample: a (co)kernel and a map to push it along."""

    role: str
    f: Morphism
    along: Morphism
    kind = "probe"

    def __post_init__(self):
        if self.role not in ("kernel", "cokernel"):
            raise ValueError(f"unknown probe role: {self.role!r}")
        if self.along.category is not self.f.category:
            raise ValueError("probe members live in different categories")
        if self.role == "kernel" and self.along.dom != self.f.dom:
            raise ValueError("pushout probe needs a map out of the kernel's domain")
        if self.role == "cokernel" and self.along.cod != self.f.cod:
            raise ValueError("pullback probe needs a map into the cokernel's codomain")

    @property
    def category(self):
        return self.f.category

    def dualize(self) -> "ProbeInstance":
        other = "cokernel" if self.role == "kernel" else "kernel"
        return ProbeInstance(role=other, f=dualize(self.f), along=dualize(self.along))

    def to_json(self) -> dict:
        return {"kind": self.kind, "backend": _backend_name(self.category),
                "role": self.role, "morphism": _mor_json(self.f),
                "along": _mor_json(self.along)}


Instance = Any  # MorphismInstance | PairInstance | SquareInstance | ProbeInstance


def _require(blob: dict, key: str):
    if key not in blob:
        raise ValueError(f"instance is missing key {key!r}")
    return blob[key]


def instance_from_json(blob: dict) -> Instance:
    """Parse any instance kind; raises ValueError on malformed input."""
    if not isinstance(blob, dict):
        raise ValueError("instance must be a JSON object")
    name = _require(blob, "backend")
    if not isinstance(name, str):
        raise ValueError("instance backend must be a string")
    cat = get_backend(name)
    kind = _require(blob, "kind")
    if kind == "morphism":
        return MorphismInstance(cat.morphism_from_json(_require(blob, "morphism")))
    if kind == "pair":
        return PairInstance(outer=cat.morphism_from_json(_require(blob, "outer")),
                            inner=cat.morphism_from_json(_require(blob, "inner")))
    if kind == "square":
        provenance = _require(blob, "provenance")
        if provenance == "pushout":
            left = cat.morphism_from_json(_require(blob, "left"))
            top = cat.morphism_from_json(_require(blob, "top"))
            if left.dom != top.dom:
                raise ValueError("pushout generators must share a domain")
            return SquareInstance(pushout(left, top))
        if provenance == "pullback":
            bottom = cat.morphism_from_json(_require(blob, "bottom"))
            right = cat.morphism_from_json(_require(blob, "right"))
            if bottom.cod != right.cod:
                raise ValueError("pullback generators must share a codomain")
            return SquareInstance(pullback(bottom, right))
        if provenance == "commutative":
            edges = {e: cat.morphism_from_json(_require(blob, e))
                     for e in ("top", "left", "bottom", "right")}
            return SquareInstance(Square(**edges))
        raise ValueError(f"unknown square provenance: {provenance!r}")
    if kind == "probe":
        return ProbeInstance(role=_require(blob, "role"),
                             f=cat.morphism_from_json(_require(blob, "morphism")),
                             along=cat.morphism_from_json(_require(blob, "along")))
    raise ValueError(f"unknown instance kind: {kind!r}")


# ---------------------------------------------------------------------------
# results


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one checker on one instance.

    verdict is "pass", "fail" or "vacuous"; failing results always carry
    a witness dict explaining (and, through the instance, replaying) the
    violation.
    """

    check: str
    verdict: str
    instance: Instance
    witness: Optional[dict] = None

    def to_json(self) -> dict:
        return {"check": self.check, "verdict": self.verdict,
                "instance": self.instance.to_json(), "witness": self.witness}


# ---------------------------------------------------------------------------
# right-side conditions


def check_right_i(f: Morphism) -> CheckResult:
    """The middle arrow of the canonical decomposition is an epimorphism."""
    inst = MorphismInstance(f)
    mid = decompose(f).fbar
    if classify(mid).epi:
        return CheckResult("right.i", PASS, inst)
    return CheckResult("right.i", FAIL, inst, {
        "reason": "middle-arrow-not-epi",
        "middle": _mor_json(mid),
    })


def check_right_ii(h: Morphism, l: Morphism) -> CheckResult:
    """If the composite h @ l arises as a kernel then so does l."""
    inst = PairInstance(outer=h, inner=l)
    if not classify(inst.composite).is_kernel:
        return CheckResult("right.ii", VACUOUS, inst)
    flags = classify(l)
    if flags.is_kernel:
        return CheckResult("right.ii", PASS, inst)
    return CheckResult("right.ii", FAIL, inst, {
        "reason": "inner-factor-not-kernel",
        "inner_flags": flags.to_json(),
    })


def _pushout_shaped(sq: Square) -> bool:
    # constructed pushouts are trusted; anything else is verified
    return sq.provenance == "pushout" or is_pushout(sq)


def check_right_iii(sq: Square) -> CheckResult:
    """A pushout square whose top edge is a kernel is also a pullback."""
    inst = SquareInstance(sq)
    if not (_pushout_shaped(sq) and classify(sq.top).is_kernel):
        return CheckResult("right.iii", VACUOUS, inst)
    if is_pullback(sq):
        return CheckResult("right.iii", PASS, inst)
    med = pullback_mediator(sq)
    return CheckResult("right.iii", FAIL, inst, {
        "reason": "pushout-square-not-pullback",
        "mediator": None if med is None else _mor_json(med),
    })


def check_right_iv(sq: Square) -> CheckResult:
    """A pushout square whose top edge is a kernel has a mono bottom edge."""
    inst = SquareInstance(sq)
    if not (_pushout_shaped(sq) and classify(sq.top).is_kernel):
        return CheckResult("right.iv", VACUOUS, inst)
    flags = classify(sq.bottom)
    if flags.mono:
        return CheckResult("right.iv", PASS, inst)
    return CheckResult("right.iv", FAIL, inst, {
        "reason": "pushed-out-edge-not-mono",
        "bottom_flags": flags.to_json(),
    })


def check_right_v(sq: Square) -> CheckResult:
    """As right.iv, under the extra hypothesis that the right edge is a cokernel."""
    inst = SquareInstance(sq)
    applicable = (_pushout_shaped(sq) and classify(sq.top).is_kernel
                  and classify(sq.right).is_cokernel)
    if not applicable:
        return CheckResult("right.v", VACUOUS, inst)
    flags = classify(sq.bottom)
    if flags.mono:
        return CheckResult("right.v", PASS, inst)
    return CheckResult("right.v", FAIL, inst, {
        "reason": "pushed-out-edge-not-mono",
        "bottom_flags": flags.to_json(),
    })


def check_right_vi(h: Morphism, l: Morphism) -> CheckResult:
    """The composite of two kernels is a kernel."""
    inst = PairInstance(outer=h, inner=l)
    if not (classify(l).is_kernel and classify(h).is_kernel):
        return CheckResult("right.vi", VACUOUS, inst)
    flags = classify(inst.composite)
    if flags.is_kernel:
        return CheckResult("right.vi", PASS, inst)
    return CheckResult("right.vi", FAIL, inst, {
        "reason": "composite-of-kernels-not-kernel",
        "composite_flags": flags.to_json(),
    })


def check_right_vii(sq: Square) -> CheckResult:
    """A pushout along a strict top edge induces an epi kernel comparison.

    The comparison runs from the kernel of the top edge to the kernel of
    the bottom edge, over the left leg of the square.
    """
    inst = SquareInstance(sq)
    if not (_pushout_shaped(sq) and classify(sq.top).strict):
        return CheckResult("right.vii", VACUOUS, inst)
    comparison = induced_kernel_map(sq)
    flags = classify(comparison)
    if flags.epi:
        return CheckResult("right.vii", PASS, inst)
    return CheckResult("right.vii", FAIL, inst, {
        "reason": "kernel-comparison-not-epi",
        "comparison": _mor_json(comparison),
        "comparison_flags": flags.to_json(),
    })


# ---------------------------------------------------------------------------
# dispatch and the left side


def _expect(instance: Instance, cls, what: str) -> None:
    if not isinstance(instance, cls):
        raise ValueError(f"{what} expects a {cls.__name__}, got {type(instance).__name__}")


def _dispatch_right(index: str, instance: Instance) -> CheckResult:
    if index == "i":
        _expect(instance, MorphismInstance, "condition i")
        return check_right_i(instance.f)
    if index == "ii":
        _expect(instance, PairInstance, "condition ii")
        return check_right_ii(instance.outer, instance.inner)
    if index == "vi":
        _expect(instance, PairInstance, "condition vi")
        return check_right_vi(instance.outer, instance.inner)
    if index in ("iii", "iv", "v", "vii"):
        _expect(instance, SquareInstance, f"condition {index}")
        fn = {"iii": check_right_iii, "iv": check_right_iv,
              "v": check_right_v, "vii": check_right_vii}[index]
        return fn(instance.square)
    raise ValueError(f"unknown condition index: {index!r}")


def check_left(cond, instance: Instance) -> CheckResult:
    """Evaluate a left-side condition on a base-side instance.

    The instance is transported to the opposite category, the matching
    right-side checker runs there, and the verdict is relabeled.  The
    returned result keeps the original instance so it serializes (and
    replays) on the base side.
    """
    cond = ConditionId.parse(cond) if isinstance(cond, str) else cond
    mirrored = _dispatch_right(cond.index, instance.dualize())
    return CheckResult(f"left.{cond.index}", mirrored.verdict, instance,
                       mirrored.witness)


def check_condition(cond, instance: Instance) -> CheckResult:
    """Evaluate any catalog condition ("right.iii", ConditionId, ...)."""
    cond = ConditionId.parse(cond) if isinstance(cond, str) else cond
    if cond.side == "right":
        return _dispatch_right(cond.index, instance)
    return check_left(cond, instance)


# ---------------------------------------------------------------------------
# unconditional decomposition checks


def check_semi_abelian(f: Morphism) -> CheckResult:
    """The middle arrow is a bimorphism (both one-sided conditions at once)."""
    inst = MorphismInstance(f)
    flags = classify(decompose(f).fbar)
    if flags.bimorphism:
        return CheckResult("semi_abelian", PASS, inst)
    return CheckResult("semi_abelian", FAIL, inst, {
        "reason": "middle-arrow-not-bimorphism",
        "middle_flags": flags.to_json(),
    })


def check_strict(f: Morphism) -> CheckResult:
    """The middle arrow is an isomorphism."""
    inst = MorphismInstance(f)
    flags = classify(f)
    if flags.strict:
        return CheckResult("strict", PASS, inst)
    return CheckResult("strict", FAIL, inst, {
        "reason": "middle-arrow-not-iso",
        "flags": flags.to_json(),
    })


def check_composite_cones(f: Morphism, g: Morphism) -> CheckResult:
    """Composite cones ignore image and coimage replacements.

    For composable f then g: the cokernel of g @ (image of f) is the
    cokernel of g @ f, and the kernel of (coimage of g) @ f is the kernel
    of g @ f, each up to the canonical comparison isomorphism.
    """
    inst = PairInstance(outer=g, inner=f)
    composite = g @ f
    u = quotient_iso(cokernel(composite).leg, cokernel(g @ decompose(f).im).leg)
    v = subobject_iso(kernel(composite).leg, kernel(decompose(g).coim @ f).leg)
    if u is not None and v is not None:
        return CheckResult("composite_cones", PASS, inst)
    return CheckResult("composite_cones", FAIL, inst, {
        "reason": "composite-cone-mismatch",
        "cokernel_side_ok": u is not None,
        "kernel_side_ok": v is not None,
    })


def check_image_slide(f: Morphism, g: Morphism, side: str) -> CheckResult:
    """Images slide across an outer kernel: im(g @ f) = g @ im(f).

    side "kernels" checks exactly that, and is vacuous unless g is a
    kernel.  side "cokernels" checks the mirror statement (coimages slide
    across an inner cokernel) by transport to the opposite category, and
    is vacuous unless f is a cokernel.
    """
    if side == "cokernels":
        mirrored = check_image_slide(dualize(g), dualize(f), "kernels")
        inst = PairInstance(outer=g, inner=f)
        return CheckResult("image_slide.cokernels", mirrored.verdict, inst,
                           mirrored.witness)
    if side != "kernels":
        raise ValueError(f"unknown image-slide side: {side!r}")
    inst = PairInstance(outer=g, inner=f)
    if not classify(g).is_kernel:
        return CheckResult("image_slide.kernels", VACUOUS, inst)
    composite_image = kernel(cokernel(g @ f).leg).leg
    slid_image = g @ decompose(f).im
    if subobject_iso(composite_image, slid_image) is not None:
        return CheckResult("image_slide.kernels", PASS, inst)
    return CheckResult("image_slide.kernels", FAIL, inst, {
        "reason": "image-does-not-slide",
        "composite_image": _mor_json(composite_image),
        "slid_image": _mor_json(slid_image),
    })


# ---------------------------------------------------------------------------
# semi-stability


def check_semistable_step(inst: ProbeInstance) -> CheckResult:
    """One semi-stability sample: push the morphism out, reclassify the copy."""
    flags = classify(inst.f)
    if inst.role == "kernel":
        if not flags.is_kernel:
            raise ValueError("probed morphism is not a kernel")
        sq = pushout(inst.along, inst.f)
        moved = classify(sq.bottom)
        ok = moved.is_kernel
    else:
        if not flags.is_cokernel:
            raise ValueError("probed morphism is not a cokernel")
        sq = pullback(inst.f, inst.along)
        moved = classify(sq.top)
        ok = moved.is_cokernel
    if ok:
        return CheckResult("semistable", PASS, inst)
    return CheckResult("semistable", FAIL, inst, {
        "reason": f"moved-copy-not-{inst.role}",
        "moved_flags": moved.to_json(),
    })


def probe_semistable(f: Morphism, role: str, n_samples: int, seed,
                     dim_bound: int = 3) -> CheckResult:
    """Sample pushouts (resp. pullbacks) along random maps and watch the copy.

    Falsification only: "pass" means no counterexample surfaced within
    n_samples tries, never a proof.  A failing result carries the single
    offending sample, which replays through check_semistable_step.
    """
    cat = f.category
    flags = classify(f)
    if role == "kernel" and not flags.is_kernel:
        raise ValueError("probed morphism is not a kernel")
    if role == "cokernel" and not flags.is_cokernel:
        raise ValueError("probed morphism is not a cokernel")
    if role not in ("kernel", "cokernel"):
        raise ValueError(f"unknown probe role: {role!r}")
    for i in range(n_samples):
        rng = random.Random(f"{seed}:semistable:{i}")
        other = cat.random_object(rng, dim_bound)
        if role == "kernel":
            along = cat.random_morphism(rng, f.dom, other)
        else:
            along = cat.random_morphism(rng, other, f.cod)
        step = check_semistable_step(ProbeInstance(role=role, f=f, along=along))
        if step.verdict == FAIL:
            witness = dict(step.witness)
            witness["sample_index"] = i
            return CheckResult("semistable", FAIL, step.instance, witness)
    return CheckResult("semistable", PASS, MorphismInstance(f))


# ---------------------------------------------------------------------------
# the named-check registry (CLI surface)


def _run_semi_abelian(instance):
    _expect(instance, MorphismInstance, "semi_abelian")
    return check_semi_abelian(instance.f)


def _run_strict(instance):
    _expect(instance, MorphismInstance, "strict")
    return check_strict(instance.f)


def _run_composite_cones(instance):
    _expect(instance, PairInstance, "composite_cones")
    return check_composite_cones(instance.inner, instance.outer)


def _run_image_slide_kernels(instance):
    _expect(instance, PairInstance, "image_slide.kernels")
    return check_image_slide(instance.inner, instance.outer, "kernels")


def _run_image_slide_cokernels(instance):
    _expect(instance, PairInstance, "image_slide.cokernels")
    return check_image_slide(instance.inner, instance.outer, "cokernels")


def _run_semistable(instance):
    _expect(instance, ProbeInstance, "semistable")
    return check_semistable_step(instance)


CHECKS: dict[str, Callable[[Instance], CheckResult]] = {
    **{f"{s}.{i}": (lambda inst, c=f"{s}.{i}": check_condition(c, inst))
       for s in SIDES for i in INDICES},
    "semi_abelian": _run_semi_abelian,
    "strict": _run_strict,
    "composite_cones": _run_composite_cones,
    "image_slide.kernels": _run_image_slide_kernels,
    "image_slide.cokernels": _run_image_slide_cokernels,
    "semistable": _run_semistable,
}

# expected instance kind per check, for documentation and input validation
CHECK_KINDS = {
    **{f"{s}.i": "morphism" for s in SIDES},
    **{f"{s}.{i}": "pair" for s in SIDES for i in ("ii", "vi")},
    **{f"{s}.{i}": "square" for s in SIDES for i in ("iii", "iv", "v", "vii")},
    "semi_abelian": "morphism",
    "strict": "morphism",
    "composite_cones": "pair",
    "image_slide.kernels": "pair",
    "image_slide.cokernels": "pair",
    "semistable": "probe",
}


def run_check(name: str, instance: Instance) -> CheckResult:
    """Run a named checker; raises ValueError for unknown names or bad kinds."""
    try:
        fn = CHECKS[name]
    except KeyError:
        raise ValueError(f"unknown check: {name!r} (known: {', '.join(sorted(CHECKS))})")
    return fn(instance)
