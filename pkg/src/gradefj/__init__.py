"""gradefj: a resource-aware Featherweight Java toolchain.

Grade algebras (ordered semirings), heterogeneous grade combination, a
graded type checker with elaboration, standard and grade-instrumented
interpreters, and a harness that checks the soundness results over a
program corpus.
"""

from .grades import (
    AFFINITY,
    BOOLEAN,
    EXTREAL,
    NAT,
    PPRIVACY,
    PRIVACY,
    TRIVIAL,
    Algebra,
    AmbiguousResidual,
    CarrierMismatch,
    ExtendAlgebra,
    FiniteAlgebra,
    FiniteTable,
    GradeError,
    GradeValue,
    Hom,
    PartialMap,
    ProductAlgebra,
    iota,
    residual,
    validate_algebra,
    validate_hom,
    zeta,
)
from .hetero import (
    GradeUniverse,
    KindedGrade,
    ONE_D,
    RefinementEdge,
    ZERO_D,
    check_universe_laws,
    default_universe,
    derived_hom,
    het_add,
    het_leq,
    het_mul,
    load_universe,
    universe_from_config,
    validate_universe,
)
from .syntax import GradedType, Program, erase, parse_program
from .typecheck import (
    CheckDiag,
    CheckError,
    TypingResult,
    check,
    check_annotated,
    check_configuration,
    check_program,
    check_table,
    elaborate_table,
)
from .runtime import Enumerate, GradedConfig, Minimal, graded_run, graded_step, std_run

__version__ = "0.1.0"
