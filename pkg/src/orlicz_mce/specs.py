"""JSON documents -> library objects, with schema validation."""

import json
from functools import lru_cache
from importlib import resources

import jsonschema

from .expectation import ConditionalExpectation
from .mce import MCEFamily, MCEOperator
from .measure import MeasureSpace, SimpleFunction, SubSigmaAlgebra
from .young import from_spec as young_from_spec

SCHEMA_FILE = "orlicz_mce.schema.json"


class SpecError(ValueError):
    """Schema violation; `path` is a JSON pointer into the document."""

    def __init__(self, message, path):
        super().__init__(f"{path or '/'}: {message}")
        self.path = path


@lru_cache(maxsize=None)
def schema():
    text = resources.files("orlicz_mce").joinpath("schemas", SCHEMA_FILE).read_text()
    return json.loads(text)


def _pointer(parts):
    return "".join("/" + str(p).replace("~", "~0").replace("/", "~1") for p in parts)


def validate(doc, kind):
    """Raise SpecError for the most relevant violation of $defs/kind."""
    full = schema()
    sub = {"$ref": f"#/$defs/{kind}", "$defs": full["$defs"]}
    validator = jsonschema.Draft202012Validator(sub)
    best = jsonschema.exceptions.best_match(validator.iter_errors(doc))
    if best is not None:
        raise SpecError(best.message, _pointer(best.absolute_path))
    return doc


def young(spec):
    validate(spec, "young")
    return young_from_spec(spec)


def _complete_blocks(blocks, space):
    alg = SubSigmaAlgebra({k: tuple(v) for k, v in blocks.items()})
    covered = set()
    for c in space.cells:
        try:
            alg.block_of(c.id)
            covered.add(c.id)
        except KeyError:
            pass
    extra = {c.id: (c.id,) for c in space.cells if c.id not in covered}
    merged = dict(alg.blocks)
    for k, v in extra.items():
        if k in merged:
            raise ValueError(f"block name {k!r} clashes with an unlisted cell id")
        merged[k] = v
    return SubSigmaAlgebra(merged)


def algebra(spec, space):
    if spec is None or spec == "identity":
        return SubSigmaAlgebra.finest(space)
    if "group_atoms" in spec:
        return SubSigmaAlgebra.grouped_atoms(space, int(spec["group_atoms"]))
    return _complete_blocks(spec["blocks"], space)


def function(spec, space):
    if "constant" in spec:
        return SimpleFunction.constant(spec["constant"])
    if "formula" in spec:
        return SimpleFunction.from_formula(space, spec["formula"], spec.get("nonatomic", 0.0))
    return SimpleFunction({k: float(v) for k, v in spec["values"].items()}, float(spec.get("default", 0.0)))


def space(spec, N=None):
    """MeasureSpace; parametric families are materialized at N (or their own N)."""
    nonatomic = {c["id"]: c["mass"] for c in spec.get("nonatomic", [])}
    if "parametric" in spec:
        par = spec["parametric"]
        n = N if N is not None else par.get("N")
        if n is None:
            raise SpecError("parametric space needs a truncation N", "/parametric")
        return MeasureSpace.from_parametric(par["mass_formula"], int(n), nonatomic)
    atoms = {c["id"]: c["mass"] for c in spec.get("atoms", [])}
    return MeasureSpace.from_masses(atoms, nonatomic)


def is_parametric(request):
    return "parametric" in request["space"]


def truncation(request, override=None):
    if override is not None:
        return override
    if "truncation" in request:
        return request["truncation"]
    return request["space"].get("parametric", {}).get("N")


def operator(request, N=None):
    """MCEOperator for finite spaces, MCEFamily for parametric ones."""
    validate(request, "request")
    phi, psi = young_from_spec(request["source"]), young_from_spec(request["target"])
    op_spec = request.get("operator", {"u": {"constant": 0.0}})
    alg_spec = op_spec.get("algebra", request["space"].get("sigma_algebra"))

    @lru_cache(maxsize=None)
    def build(n):
        sp = space(request["space"], n)
        E = ConditionalExpectation(sp, algebra(alg_spec, sp))
        return MCEOperator(function(op_spec["u"], sp), E, phi, psi)

    if is_parametric(request):
        n = truncation(request, N)
        if n is None:
            raise SpecError("parametric space needs a truncation", "/truncation")
        return MCEFamily(build, int(n))
    return build(None)
