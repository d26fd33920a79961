pub mod criterion {
    //! Re-exported so every bench target pins the same criterion build.

    pub use criterion::*;
}
