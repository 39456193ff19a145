pub mod linalg;
pub mod qqa;
pub mod aeqs;
pub mod evolve;
pub mod gallery;
pub mod compilers;
pub mod doc;
pub mod numfmt;
