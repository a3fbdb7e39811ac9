pub mod cat;
pub mod corpus;
pub mod enumerate;
pub mod error;
pub mod finset;
pub mod presheaf;
pub mod sheaf;
pub mod site;
pub mod smallmap;
pub mod wpresheaf;

pub use error::{Error, Result};
