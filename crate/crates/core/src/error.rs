use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degree mismatch: {0} vs {1}")]
    DegreeMismatch(usize, usize),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("cap of {cap} exceeded while computing {what} (reached {partial})")]
    CapExceeded {
        what: String,
        cap: usize,
        partial: usize,
    },

    #[error("search budget exhausted in {what}: {detail}")]
    BudgetExhausted { what: String, detail: String },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("group is not transitive")]
    NotTransitive,

    #[error("point set is not invariant under the generators")]
    NotInvariant,

    #[error("coset representatives do not form a full transversal")]
    TransversalIncomplete,

    #[error("target is not in the span of the generators")]
    NotInSpan,

    #[error("generators do not generate the full direct product")]
    NotFullProduct,

    #[error("target is not an element of the group")]
    NotInGroup,

    #[error("parity error: {0}")]
    Parity(String),

    #[error("domain error: {0}")]
    Domain(String),
}

impl Error {
    pub(crate) fn cap(what: impl Into<String>, cap: usize, partial: usize) -> Self {
        Error::CapExceeded {
            what: what.into(),
            cap,
            partial,
        }
    }

    pub(crate) fn budget(what: impl Into<String>, detail: impl Into<String>) -> Self {
        Error::BudgetExhausted {
            what: what.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn hypothesis(msg: impl Into<String>) -> Self {
        Error::Hypothesis(msg.into())
    }

    /// True for errors caused by resource limits rather than bad input.
    pub fn is_resource_limit(&self) -> bool {
        matches!(self, Error::CapExceeded { .. } | Error::BudgetExhausted { .. })
    }
}
