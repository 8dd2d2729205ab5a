pub mod derive;
pub mod jet;
pub mod multi_index;

pub use derive::{derive, expand, fd_check, FdCheck, JetValue};
pub use jet::{Group, Jet, JetSpace, Shape, MAX_ORDER};
pub use multi_index::MultiIndex;
