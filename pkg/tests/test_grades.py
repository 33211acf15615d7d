"""Grade algebra laws, residuals, and homomorphisms."""

from fractions import Fraction

import pytest

from gradefj.grades import (
    AFFINITY,
    AmbiguousResidual,
    BOOLEAN,
    CarrierMismatch,
    EXTREAL,
    ExtendAlgebra,
    ExtFin,
    ExtInf,
    ExtReal,
    FiniteAlgebra,
    FiniteElem,
    FiniteMapHom,
    FiniteTable,
    IotaHom,
    Nat,
    NAT,
    PairValue,
    PPRIVACY,
    PRIVACY,
    ProductAlgebra,
    ProjLeftHom,
    TRIVIAL,
    Triv,
    ZetaHom,
    affinity_table,
    all_residuals,
    alg_add,
    alg_leq,
    alg_mul,
    alg_one,
    alg_zero,
    iota,
    residual,
    validate_algebra,
    validate_hom,
    zeta,
)

AFF = lambda n: FiniteElem(n, "affinity")
PRIV = lambda n: FiniteElem(n, "privacy2")
PP = lambda n: FiniteElem(n, "privacy4")


# ---------------------------------------------------------------------------
# order / sum / product / constants

def test_leq_examples():
    assert alg_leq(NAT, Nat(0), Nat(5))
    assert alg_leq(AFFINITY, AFF("1"), AFF("w"))
    assert not alg_leq(PRIVACY, PRIV("public"), PRIV("private"))
    assert alg_leq(PRIVACY, PRIV("private"), PRIV("public"))


def test_add_mul_examples():
    assert alg_add(NAT, Nat(2), Nat(2)) == Nat(4)
    assert alg_add(PRIVACY, PRIV("private"), PRIV("public")) == PRIV("public")
    assert alg_mul(PRIVACY, PRIV("private"), PRIV("public")) == PRIV("private")
    ext_nat = ExtendAlgebra(NAT)
    assert alg_mul(ext_nat, ExtFin(Nat(0)), ExtInf()) == ExtFin(Nat(0))
    assert alg_mul(ext_nat, ExtFin(Nat(2)), ExtInf()) == ExtInf()
    assert alg_add(ext_nat, ExtFin(Nat(2)), ExtInf()) == ExtInf()


def test_constants():
    assert alg_zero(NAT) == Nat(0) and alg_one(NAT) == Nat(1)
    assert alg_zero(TRIVIAL) == Triv() and alg_one(TRIVIAL) == Triv()
    prod = ProductAlgebra(AFFINITY, PRIVACY)
    assert alg_zero(prod) == PairValue(AFF("0"), PRIV("0"))
    assert alg_one(prod) == PairValue(AFF("1"), PRIV("public"))


def test_carrier_mismatch():
    with pytest.raises(CarrierMismatch):
        alg_add(NAT, Nat(1), AFF("1"))
    with pytest.raises(CarrierMismatch):
        alg_leq(AFFINITY, PRIV("public"), AFF("1"))


def test_extreal_exact():
    third = ExtReal(Fraction(1, 3))
    assert alg_add(EXTREAL, third, third) == ExtReal(Fraction(2, 3))
    assert alg_mul(EXTREAL, ExtReal(Fraction(0)), ExtReal(None)) == ExtReal(Fraction(0))
    assert alg_leq(EXTREAL, ExtReal(Fraction(7, 2)), ExtReal(None))


# ---------------------------------------------------------------------------
# residuals, against a brute-force oracle

def brute_force_residuals_nat(available, demand, bound=50):
    return [Nat(s) for s in range(bound + 1)
            if alg_leq(NAT, alg_add(NAT, Nat(demand), Nat(s)), Nat(available))]


def test_residual_nat_oracle():
    # expected value computed by enumerating all s' <= 4 with 2 + s' <= 4
    oracle = brute_force_residuals_nat(4, 2)
    assert max(s.n for s in oracle) == 2
    assert residual(NAT, Nat(4), Nat(2)) == Nat(2)
    assert residual(NAT, Nat(1), Nat(2)) is None


def test_residual_privacy_join_table():
    # oracle: join table — private v public = public <= public
    valid = all_residuals(PRIVACY, PRIV("public"), PRIV("private"))
    assert PRIV("public") in valid
    assert residual(PRIVACY, PRIV("public"), PRIV("private")) == PRIV("public")


@pytest.mark.parametrize("spec", [AFFINITY, BOOLEAN, PRIVACY, PPRIVACY,
                                  ProductAlgebra(AFFINITY, PRIVACY),
                                  ExtendAlgebra(AFFINITY)])
def test_residual_maximality_finite(spec):
    elems = spec.elements()
    for avail in elems:
        for demand in elems:
            if demand == spec.zero():
                continue
            valid = [s for s in elems
                     if spec.leq(spec.add(demand, s), avail)]
            try:
                got = spec.residual(avail, demand)
            except AmbiguousResidual as exc:
                maximal = [s for s in valid
                           if not any(t != s and spec.leq(s, t) for t in valid)]
                assert sorted(map(str, exc.candidates)) == sorted(map(str, maximal))
                continue
            if got is None:
                assert not valid
            else:
                assert got in valid
                assert all(not (got != t and spec.leq(got, t)) for t in valid)


def test_residual_nat_properties():
    for avail in range(12):
        for demand in range(1, 12):
            got = residual(NAT, Nat(avail), Nat(demand))
            oracle = brute_force_residuals_nat(avail, demand, bound=12)
            if got is None:
                assert not oracle
            else:
                assert got.n == max(s.n for s in oracle)


def test_ambiguous_residual():
    from conftest import ambiguous_algebra
    spec = ambiguous_algebra()
    assert validate_algebra(spec).ok, validate_algebra(spec).failures()
    with pytest.raises(AmbiguousResidual) as exc:
        spec.residual(FiniteElem("a", "amb"), FiniteElem("1", "amb"))
    names = sorted(v.name for v in exc.value.candidates)
    assert names == ["x", "y"]


# ---------------------------------------------------------------------------
# iota / zeta

def test_iota_examples():
    assert iota(Nat(0), PRIVACY) == PRIV("0")
    # unfold: 1 + 1 in the affinity sum table gives w
    one_plus_one = alg_add(AFFINITY, AFF("1"), AFF("1"))
    assert one_plus_one == AFF("w")
    assert iota(Nat(2), AFFINITY) == one_plus_one
    assert iota(Nat(3), NAT) == Nat(3)
    assert iota(Nat(1), PRIVACY) == PRIV("public")


def test_zeta_examples():
    assert zeta(Nat(0), NAT) == Triv()
    assert zeta(AFF("w"), AFFINITY) == Triv()
    assert zeta(PRIV("public"), PRIVACY) == Triv()


@pytest.mark.parametrize("target", [NAT, TRIVIAL, AFFINITY, BOOLEAN, PRIVACY,
                                    PPRIVACY, EXTREAL,
                                    ProductAlgebra(AFFINITY, PRIVACY),
                                    ExtendAlgebra(AFFINITY)])
def test_iota_zeta_are_homomorphisms(target):
    assert validate_hom(IotaHom(target)).ok
    assert validate_hom(ZetaHom(target)).ok


# ---------------------------------------------------------------------------
# finite maps and law validation

def pp_to_p():
    return FiniteMapHom(PPRIVACY, PRIVACY, {
        "0": PRIV("0"), "a": PRIV("private"), "b": PRIV("public"),
        "c": PRIV("private"), "d": PRIV("public")})


def test_hom_apply_examples():
    assert pp_to_p().apply(PP("d")) == PRIV("public")
    proj = ProjLeftHom(ProductAlgebra(AFFINITY, PRIVACY))
    assert proj.apply(PairValue(AFF("w"), PRIV("private"))) == AFF("w")


def test_validate_hom_detects_unit_violation():
    bad = FiniteMapHom(BOOLEAN, BOOLEAN, {
        "0": FiniteElem("0", "boolean"), "1": FiniteElem("0", "boolean")})
    report = validate_hom(bad)
    assert not report.ok
    assert any(r.law == "hom-one" for r in report.failures())


def test_validate_hom_pp_to_p():
    assert validate_hom(pp_to_p()).ok


@pytest.mark.parametrize("spec", [AFFINITY, BOOLEAN, PRIVACY, PPRIVACY,
                                  ProductAlgebra(AFFINITY, PRIVACY),
                                  ExtendAlgebra(AFFINITY)])
def test_validate_algebra_exhaustive(spec):
    report = validate_algebra(spec)
    assert report.ok, report.failures()


@pytest.mark.parametrize("spec", [NAT, EXTREAL, TRIVIAL, ExtendAlgebra(NAT)])
def test_validate_algebra_sampled(spec):
    report = validate_algebra(spec)
    assert report.ok, report.failures()


def test_validate_algebra_catches_noncommutative_sum():
    table = affinity_table()
    broken_sum = {a: dict(row) for a, row in table.sum.items()}
    broken_sum["1"]["w"] = "1"  # but w + 1 stays w
    broken = FiniteAlgebra(FiniteTable(
        name="broken", elements=table.elements, leq=table.leq,
        sum=broken_sum, mul=table.mul, zero=table.zero, one=table.one))
    report = validate_algebra(broken)
    failed = {r.law for r in report.failures()}
    assert "add-commutative" in failed
    witness = [r for r in report.failures() if r.law == "add-commutative"][0].witness
    assert witness is not None


def test_validate_algebra_rejects_unclosed_order():
    # leq lacking reflexivity must be rejected, not repaired
    table = affinity_table()
    pruned = frozenset(p for p in table.leq if p != ("1", "1"))
    broken = FiniteAlgebra(FiniteTable(
        name="noposet", elements=table.elements, leq=pruned,
        sum=table.sum, mul=table.mul, zero=table.zero, one=table.one))
    report = validate_algebra(broken)
    assert any(r.law == "order-reflexive" for r in report.failures())


def test_validate_table_shape_total():
    table = affinity_table()
    partial_sum = {a: dict(row) for a, row in table.sum.items()}
    del partial_sum["1"]["w"]
    broken = FiniteAlgebra(FiniteTable(
        name="partial", elements=table.elements, leq=table.leq,
        sum=partial_sum, mul=table.mul, zero=table.zero, one=table.one))
    report = validate_algebra(broken)
    assert any(r.law == "table-shape" for r in report.failures())


def test_compose_joint_must_agree():
    from gradefj.grades import ComposeHom, GradeError, IotaHom, ZetaHom
    with pytest.raises(GradeError):
        ComposeHom(ZetaHom(AFFINITY), IotaHom(PRIVACY))  # Triv is not Nat
    ok = ComposeHom(IotaHom(AFFINITY), ZetaHom(AFFINITY))
    assert ok.apply(Nat(2)) == Triv()
