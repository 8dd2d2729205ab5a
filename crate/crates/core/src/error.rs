use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("syntax error at byte {offset}: expected {}, found {found}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("function `{func}` takes {expected} argument(s), got {found} (byte {offset})")]
    Arity {
        func: String,
        expected: usize,
        found: usize,
        offset: usize,
    },
    #[error("in `{field}`: {source}")]
    InField {
        field: String,
        #[source]
        source: Box<Error>,
    },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("validation failed: {message}")]
    Validation { message: String },
    #[error("domain error: `{expr}` is singular at the evaluation point")]
    Domain { expr: String },
    #[error("derivative order {order} exceeds the cap of {cap}")]
    Order { order: u32, cap: u32 },
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("singular matrix: {0}")]
    SingularMatrix(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("operation requires a {expected} metric, got {found}")]
    Kind { expected: String, found: String },
    #[error("degenerate delta ({0:e}) in the weakly Kähler Randers criterion")]
    DegenerateDelta(f64),
    #[error("unknown zoo id `{0}`")]
    UnknownZooId(String),
    #[error("unknown suite `{0}`")]
    UnknownSuite(String),
    #[error("{0}")]
    Io(String),
}

impl Error {
    pub fn in_field(self, field: impl Into<String>) -> Error {
        Error::InField {
            field: field.into(),
            source: Box::new(self),
        }
    }

    /// Stable name of the innermost error kind.
    pub fn kind_name(&self) -> &'static str {
        match self.root() {
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownIdentifier { .. } => "UnknownIdentifier",
            Error::Arity { .. } => "ArityError",
            Error::InField { .. } => unreachable!("root() strips field wrappers"),
            Error::Schema(_) => "SchemaError",
            Error::Validation { .. } => "ValidationError",
            Error::Domain { .. } => "DomainError",
            Error::Order { .. } => "OrderError",
            Error::UnboundVariable(_) => "UnboundVariable",
            Error::SingularMatrix(_) => "SingularMatrix",
            Error::Shape(_) => "ShapeError",
            Error::Kind { .. } => "KindError",
            Error::DegenerateDelta(_) => "DegenerateDelta",
            Error::UnknownZooId(_) => "UnknownId",
            Error::UnknownSuite(_) => "UnknownSuite",
            Error::Io(_) => "IoError",
        }
    }

    /// The innermost error, skipping field-path wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::InField { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
