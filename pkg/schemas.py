"""
Schemas Module - JSON payloads in and reports out

Input models validate problem files and convert them into domain objects.
Output models describe every report the CLI emits; each report is validated
against its model before it is printed. Rationals travel as integers or
"p/q" strings; floats are rejected.
"""

import re
from fractions import Fraction
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Type, TypeVar, Union

from pydantic import (
    AfterValidator,
    BaseModel,
    ConfigDict,
    Field,
    StrictBool,
    StrictInt,
    StrictStr,
    ValidationError,
)

from cones import Cone, cone_from_generators, cone_from_inequalities, same_cone
from errors import InputError
from instability import Representation, Transform, WeightVector, weyl_transform
from rootdatum import Character, RootDatum, element_from_word
from states import IndexAction, QuasiStateFamily, StateComponent

_RATIONAL = re.compile(r"[+-]?\d+(/[1-9]\d*)?")


def _check_rational_text(text: str) -> str:
    if not _RATIONAL.fullmatch(text.strip()):
        raise ValueError(f"not a rational literal: {text!r}")
    return text


RationalStr = Annotated[StrictStr, AfterValidator(_check_rational_text)]
Rational = Union[StrictInt, RationalStr]
RationalVector = List[Rational]


def parse_rational(value: Union[int, str]) -> Fraction:
    return Fraction(value) if isinstance(value, int) else Fraction(value.strip())


def parse_vector(values: List[Union[int, str]]) -> Tuple[Fraction, ...]:
    return tuple(parse_rational(v) for v in values)


ModelT = TypeVar("ModelT", bound=BaseModel)


def load_model(model: Type[ModelT], data: Any) -> ModelT:
    """Validate a payload, turning the first pydantic error into an InputError naming the field."""
    try:
        return model.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        location = ".".join(str(part) for part in first["loc"]) or model.__name__
        raise InputError(first["msg"], field=location)


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", populate_by_name=True)


# ---------------------------------------------------------------------------
# Inputs
# ---------------------------------------------------------------------------

class DatumModel(_Strict):
    rank: StrictInt = Field(description="Rank n of the ambient lattices Y = X = Z^n")
    roots: List[List[StrictInt]] = Field(default_factory=list, description="Roots as integer vectors")
    simple: List[StrictInt] = Field(default_factory=list, description="Indices of the simple roots")
    coroots: List[List[StrictInt]] = Field(default_factory=list, description="Coroots parallel to roots")
    gram: List[List[StrictInt]] = Field(description="Symmetric positive definite Weyl-invariant form")

    def to_datum(self) -> RootDatum:
        return RootDatum(self.rank, self.roots, self.simple, self.coroots, self.gram)


class ConeModel(_Strict):
    dim: StrictInt
    inequalities: Optional[List[RationalVector]] = None
    generators: Optional[List[RationalVector]] = None

    def to_cone(self) -> Cone:
        if self.inequalities is None and self.generators is None:
            raise InputError("give inequalities or generators", field="cone")
        if self.inequalities is not None:
            cone = cone_from_inequalities([parse_vector(b) for b in self.inequalities], self.dim)
            if self.generators is not None:
                given = cone_from_generators([parse_vector(g) for g in self.generators], self.dim)
                if not same_cone(cone, given):
                    raise InputError("inequalities and generators describe different cones", field="cone")
            return cone
        return cone_from_generators([parse_vector(g) for g in self.generators], self.dim)


class WordModel(_Strict):
    weyl_word: List[StrictInt] = Field(default_factory=list)


class IndexPermModel(_Strict):
    weyl_word: List[StrictInt]
    perm: List[StrictInt]


class ComponentModel(_Strict):
    index: StrictInt
    chars: List[RationalVector] = Field(default_factory=list)


class QuasiStateModel(_Strict):
    components: List[ComponentModel]
    index_action: List[IndexPermModel] = Field(default_factory=list)
    base: StrictInt = 0

    def to_family(self, d: RootDatum) -> QuasiStateFamily:
        ordered = sorted(self.components, key=lambda c: c.index)
        if [c.index for c in ordered] != list(range(len(ordered))):
            raise InputError("component indices must be 0..k-1", field="components")
        comps = tuple(StateComponent(tuple(Character(parse_vector(x)) for x in c.chars)) for c in ordered)
        action = None
        if self.index_action:
            action = IndexAction.generate(
                d, len(comps), [(element_from_word(d, g.weyl_word), g.perm) for g in self.index_action]
            )
        return QuasiStateFamily(comps, d.rank, action, self.base)


class PairModel(_Strict):
    index: StrictInt
    A: List[RationalVector] = Field(default_factory=list)
    B: List[RationalVector] = Field(default_factory=list)


class ProblemModel(_Strict):
    gram: Optional[List[List[StrictInt]]] = Field(default=None, description="Defaults to the datum's Gram matrix")
    pairs: Optional[List[PairModel]] = None
    xi: Optional[QuasiStateModel] = None
    upsilon: Optional[QuasiStateModel] = None
    identifications: Optional[List[WordModel]] = None
    equations: List[RationalVector] = Field(default_factory=list, description="Characters that must vanish on lambda")


class RepresentationModel(_Strict):
    weights: List[RationalVector]
    labels: List[StrictStr]

    def to_representation(self) -> Representation:
        return Representation(tuple(Character(parse_vector(w)) for w in self.weights), tuple(self.labels))


class TransformModel(_Strict):
    matrix: Optional[List[RationalVector]] = None
    weyl_word: Optional[List[StrictInt]] = None

    def to_transform(self, rep: Representation, d: RootDatum) -> Transform:
        if self.matrix is None:
            if self.weyl_word is None:
                raise InputError("give a matrix or a weyl_word", field="transforms")
            return weyl_transform(rep, d, element_from_word(d, self.weyl_word))
        return Transform(tuple(parse_vector(row) for row in self.matrix), self.weyl_word)


class InstabilityModel(_Strict):
    representation: RepresentationModel
    vectors: List[Dict[StrictStr, Rational]]
    transforms: List[Union[List[RationalVector], TransformModel]] = Field(default_factory=list)
    mode: Literal["null-cone", "state"] = "null-cone"
    upsilon: Optional[QuasiStateModel] = None
    equations: List[RationalVector] = Field(default_factory=list)
    certified_exact: StrictBool = False

    def vectors_for(self, rep: Representation) -> List[WeightVector]:
        return [WeightVector.from_mapping({k: parse_rational(v) for k, v in x.items()}).check(rep) for x in self.vectors]

    def transforms_for(self, rep: Representation, d: RootDatum) -> List[Transform]:
        out = []
        for t in self.transforms:
            if isinstance(t, TransformModel):
                out.append(t.to_transform(rep, d))
            else:
                out.append(Transform(tuple(parse_vector(row) for row in t)))
        return out


class SubsetModel(_Strict):
    cone: ConeModel
    stabilizer: List[WordModel] = Field(default_factory=list)
    saturated: Optional[StrictBool] = None
    finite_type: Optional[StrictBool] = None


class VerifyCentreModel(SubsetModel):
    centre: List[StrictInt]


class ParabolicModel(_Strict):
    cocharacter: RationalVector = Field(alias="lambda")


# ---------------------------------------------------------------------------
# Outputs
# ---------------------------------------------------------------------------

Kind = Literal["neg_inf", "negative", "zero", "positive", "pos_inf"]


class ViolationOut(_Strict):
    field: StrictStr
    message: StrictStr


class ValidateOut(_Strict):
    valid: StrictBool
    violations: List[ViolationOut]
    weyl_group_order: Optional[StrictInt]


class ExtendedValueOut(_Strict):
    tag: Literal["neg_inf", "finite", "pos_inf"]
    value: Optional[RationalStr]


class ParabolicOut(_Strict):
    nonneg_roots: List[StrictInt]
    levi_roots: List[StrictInt]
    ru_roots: List[StrictInt]
    proper: StrictBool


class ConeOut(_Strict):
    dim: StrictInt
    inequalities: List[List[RationalStr]]
    generators: List[List[RationalStr]]


class OptimumOut(_Strict):
    kind: Kind
    sign: StrictInt
    feasible: StrictBool
    m_squared: Optional[RationalStr]
    m_squared_signed: Optional[ExtendedValueOut]
    ray: Optional[List[RationalStr]]
    minimizer: Optional[List[RationalStr]]
    active_constraints: List[Tuple[Literal["A", "B"], StrictInt]]
    certificate: Optional[Dict[str, Any]]


class WitnessOut(_Strict):
    index: StrictInt
    ray: List[RationalStr]


class OptimalClassOut(_Strict):
    kind: Kind
    sign: StrictInt
    m_squared: Optional[RationalStr]
    m_squared_signed: Optional[ExtendedValueOut]
    witnesses: List[WitnessOut]
    parabolic: Optional[ParabolicOut]
    consistent: StrictBool
    per_index: List[OptimumOut]
    diagnostics: List[StrictStr]
    search_scope: Optional[StrictStr]
    caveat: StrictStr


class OracleOut(_Strict):
    kind: Kind
    ratio_squared: Optional[RationalStr]
    best: Optional[List[RationalStr]]
    index: Optional[StrictInt]
    points_scanned: StrictInt
    radius: StrictInt


class HilbertMumfordOut(_Strict):
    unstable: Optional[StrictBool]
    witness: Optional[List[RationalStr]]
    points_scanned: StrictInt
    radius: StrictInt
    error: Optional[StrictStr]


class InstabilityOut(_Strict):
    optimal_class: OptimalClassOut
    destab_cone: ConeOut
    transforms: StrictInt
    mode: Literal["null-cone", "state"]
    # empty unless --scan was given
    hilbert_mumford: List[HilbertMumfordOut]


class CentreOut(_Strict):
    centre: List[StrictInt]
    m_squared: RationalStr
    parabolic: ParabolicOut
    fixed_by_stabilizer: StrictBool
    in_subset: StrictBool
    strict_functional: List[RationalStr]
    scope: StrictStr


class VerificationOut(_Strict):
    centre: List[StrictInt]
    passed: StrictBool
    failures: List[StrictStr]
    mu: Optional[StrictStr]
    parabolic: Optional[ParabolicOut]
    scope: StrictStr


class ParabolicReportOut(_Strict):
    cocharacter: List[RationalStr]
    parabolic: ParabolicOut
    simplex_cone: ConeOut


class CrossCheckOut(_Strict):
    verdict: Literal["AGREE", "DISAGREE", "ORACLE_BOUND_ONLY"]
    message: StrictStr
    exact: OptimalClassOut
    oracle: OracleOut
    radius: StrictInt
    seed: Optional[StrictInt]
    functoriality: Optional[StrictBool]
