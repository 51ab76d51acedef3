use alloc::string::String;

use crate::value::Sym;

/// Errors raised by the library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("parse error at {line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("condition refers to unbound variable ${0}")]
    OpenCondition(Sym),
    #[error("condition outside the decidable fragment: {0}")]
    FragmentExceeded(String),
    #[error("guards overlap without being equal: {0}")]
    NotEquiDisjoint(String),
    #[error("free logical variables remain: {0}")]
    FreeVariables(String),
    #[error("formula is not in sHML normal form")]
    NotNormalForm,
    #[error("formula is not in sHML")]
    NotShml,
    #[error("ff at top level has no enforcer")]
    FfAtTop,
    #[error("formula mixes safety and co-safety operators")]
    NotMonitorable,
    #[error("unguarded recursion on {0}")]
    Unguarded(String),
    #[error("unbound recursion variable {0}")]
    UnboundVariable(String),
    #[error("no normal form: the loop through {0} rebinds data it depends on")]
    LoopRebindsData(String),
    #[error("state budget of {0} exceeded")]
    StateBudget(usize),
}

pub type Result<T> = core::result::Result<T, Error>;
