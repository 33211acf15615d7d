"""Parser, printer, class table, graded subtyping, erasure."""

import pytest

from gradefj.grades import FiniteElem, Nat
from gradefj.hetero import KindedGrade
from gradefj.syntax import (
    Block,
    FieldAccess,
    GradedType,
    Invk,
    New,
    SyntaxErrorGFJ,
    UnknownClass,
    UnknownMember,
    Var,
    erase,
    format_expr,
    format_program,
    free_vars,
    gtype_leq,
    is_source_value,
    parse_expr,
    parse_program,
    strip_ascriptions,
    subst,
)
from gradefj.typecheck import check_program, check_table

AFF = lambda n: KindedGrade("A", FiniteElem(n, "affinity"))
N = lambda n: KindedGrade("N", Nat(n))

PAIR_SRC = """
class Pair { A[N:1] first; A[N:1] second; }
class A { }
run {A[N:4] a = new A(); new Pair(a, a)} at N:1
"""


def test_parse_fields_graded(universe):
    prog = parse_program(PAIR_SRC, universe)
    flds = prog.table.fields("Pair")
    assert [(f.className, f.grade, f.name) for f in flds] == [
        ("A", N(1), "first"), ("A", N(1), "second")]


def test_parse_run_grade(universe):
    prog = parse_program(PAIR_SRC, universe)
    assert prog.mainGrade == N(1)
    assert isinstance(prog.main, Block)


def test_parse_ascription(universe):
    e = parse_expr("x @ P:private .first", universe)
    assert isinstance(e, FieldAccess)
    assert e.recv.ascription == KindedGrade("P", FiniteElem("private", "privacy2"))
    # an ascription after the access binds to the access itself
    e2 = parse_expr("x.first @ 2", universe)
    assert e2.ascription == N(2)
    assert e2.recv.ascription is None


def test_parse_errors_carry_position(universe):
    with pytest.raises(SyntaxErrorGFJ) as exc:
        parse_program("class A { }\nrun new A( at 1", universe)
    assert exc.value.line == 2
    with pytest.raises(SyntaxErrorGFJ):
        parse_program("class A { }\nrun x at Q:3", universe)  # unknown kind
    with pytest.raises(SyntaxErrorGFJ):
        parse_program("class A { }\nrun x at A:9", universe)  # bad element


def test_this_reserved(universe):
    with pytest.raises(SyntaxErrorGFJ):
        parse_program("class A { }\nrun {A[1] this = new A(); this} at 1", universe)


def test_duplicate_class_rejected(universe):
    with pytest.raises(SyntaxErrorGFJ):
        parse_program("class A { }\nclass A { }\nrun new A() at 1", universe)


def test_format_parse_roundtrip_corpus(corpus):
    for entry in corpus:
        printed = format_program(entry.program)
        reparsed = parse_program(printed, entry.universe)
        assert reparsed.main == entry.program.main, entry.name
        assert reparsed.mainGrade == entry.program.mainGrade
        assert reparsed.table.classes == entry.program.table.classes


# ---------------------------------------------------------------------------
# class table lookups

GETTERS = """
class A { }
class Pair { A[A:1] first; A[A:1] second;
  A[A:w] getFirst() [A:1] { new A() }
}
run new A() at 1
"""


def test_fields_mtype_mbody(universe):
    table = parse_program(GETTERS, universe).table
    assert [f.name for f in table.fields("Pair")] == ["first", "second"]
    mt = table.mtype("Pair", "getFirst")
    assert mt.thisGrade == AFF("1")
    assert mt.params == ()
    assert mt.returnType == GradedType("A", AFF("w"))
    params, body = table.mbody("Pair", "getFirst")
    assert params == () and isinstance(body, New)
    with pytest.raises(UnknownMember):
        table.mbody("Pair", "missing")
    with pytest.raises(UnknownClass):
        table.fields("Nope")


def test_inherited_fields_prefix(universe):
    src = ("class A { }\nclass Base { A[1] x; }\n"
           "class Mid extends Base { A[1] y; }\n"
           "class Leaf extends Mid { A[1] z; }\nrun new A() at 1")
    table = parse_program(src, universe).table
    names = [f.name for f in table.fields("Leaf")]
    assert names == ["x", "y", "z"]
    # fields of a superclass are a prefix of every subclass's fields
    for sub, sup in [("Leaf", "Mid"), ("Leaf", "Base"), ("Mid", "Base")]:
        sub_f = [f.name for f in table.fields(sub)]
        sup_f = [f.name for f in table.fields(sup)]
        assert sub_f[:len(sup_f)] == sup_f


# ---------------------------------------------------------------------------
# graded subtyping

def test_gtype_leq_contravariant(universe):
    table = parse_program(GETTERS, universe).table
    assert gtype_leq(universe, table, GradedType("A", AFF("w")), GradedType("A", AFF("1")))
    assert not gtype_leq(universe, table, GradedType("A", AFF("1")), GradedType("A", AFF("w")))
    assert gtype_leq(universe, table, GradedType("A", AFF("1")), GradedType("A", AFF("1")))


def test_gtype_leq_classes(universe):
    src = "class A { }\nclass B extends A { }\nrun new B() at 1"
    table = parse_program(src, universe).table
    assert gtype_leq(universe, table, GradedType("B", N(1)), GradedType("A", N(1)))
    assert not gtype_leq(universe, table, GradedType("A", N(1)), GradedType("B", N(1)))


# ---------------------------------------------------------------------------
# erasure / substitution

def test_erase_structural(universe):
    prog = parse_program(PAIR_SRC, universe)
    result = check_program(universe, prog.table, prog)
    assert erase(result.elaborated) == prog.main


def test_erase_elaborate_identity_on_corpus(corpus):
    for entry in corpus:
        if entry.manifest["expect"] != "accept":
            continue
        if check_table(entry.universe, entry.program.table):
            continue
        result = check_program(entry.universe, entry.program.table, entry.program)
        assert erase(result.elaborated) == strip_ascriptions(entry.program.main), entry.name


def test_subst_stops_at_shadow(universe):
    e = parse_expr("{A[1] x = x; new Pair(x, y)}", universe)
    out = subst(e, {"x": "z", "y": "w"})
    assert out.init == Var("z")           # free occurrence renamed
    body = out.body
    assert body.args[0] == Var("x")       # bound occurrence untouched
    assert body.args[1] == Var("w")


def test_free_vars(universe):
    e = parse_expr("{A[1] x = y; new Pair(x, z)}", universe)
    assert free_vars(e) == {"y", "z"}


def test_is_source_value(universe):
    assert is_source_value(parse_expr("new Pair(new A(), new A())", universe))
    assert not is_source_value(parse_expr("new Pair(x, new A())", universe))


def test_format_expr_ascription_roundtrip(universe):
    e = parse_expr("(p @ 2).first @ 2", universe)
    assert parse_expr(format_expr(e), universe) == e


def test_gtype_leq_is_a_preorder(universe):
    src = "class A { }\nclass B extends A { }\nrun new B() at 1"
    table = parse_program(src, universe).table
    types = [GradedType(c, g) for c in ("A", "B")
             for g in (N(0), N(1), N(2), AFF("1"), AFF("w"))]
    for t in types:
        assert gtype_leq(universe, table, t, t)
    for t1 in types:
        for t2 in types:
            for t3 in types:
                if gtype_leq(universe, table, t1, t2) and gtype_leq(universe, table, t2, t3):
                    assert gtype_leq(universe, table, t1, t3)
    # antisymmetry within a single kind
    for t1 in types:
        for t2 in types:
            if t1.grade.kind == t2.grade.kind:
                if gtype_leq(universe, table, t1, t2) and gtype_leq(universe, table, t2, t1):
                    assert t1 == t2
