//! Hierarchical hypergraphs as an intermediate representation for
//! lambda-calculus programs, with a token-passing evaluator and
//! graph-level compiler passes.

pub mod closure;
pub mod corpus;
pub mod diagrams;
pub mod error;
pub mod eval;
pub mod foliation;
pub mod graph;
pub mod iso;
pub mod machine;
pub mod prim;
pub mod rad;
pub mod readback;
pub mod rewrite;
pub mod simplify;
pub mod term;
pub mod text;
pub mod translate;
pub mod typeinfer;
pub mod types;
pub mod validate;

pub use error::{GraphError, ParseError};
pub use graph::{
    build_atom, compose_seq, compose_tensor, empty, identity, Atom, Edge, EdgeId, EdgeLabel, Hypernet, Mode, Node,
    NodeId, Signature,
};
pub use iso::{iso_check, iso_check_seeded, iso_check_up_to_copies, IsoWitness};
pub use text::{parse_hypernet, print_hypernet};
pub use types::ObjectType;
pub use validate::{check_monogamous, validate_hypernet, Violation, ViolationKind};
pub use eval::{eval_cbn, eval_cbv, EvalResult};
pub use prim::{Const, PrimOp};
pub use term::{alpha_eq, free_vars, parse, subst, Term};
pub use simplify::simplify;
pub use translate::{translate_typed, translate_untyped, Context, TranslateError};
pub use foliation::{defoliate, foliate, fuse, Cell, Foliation, FoliationError};
pub use rewrite::{apply_rewrite, find_matches, normalize, Matching, RewriteError, RewriteRule};
pub use typeinfer::{infer, ErrorKind, ErrorPath, InferError, TypeExpr, Typing};
pub use closure::{check_globalized, convert, hoist, CcError};
pub use rad::{eval_reverse, fd_oracle, gradient, rad_term, rad_transform, AdjointResult, RadError, RdTable};
