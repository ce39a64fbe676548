//! Milnor μ̄-invariants of string links and the factorization of the Conway
//! polynomial of the closure through the knot closure.
//!
//! The pipeline: a braid or tangle diagram gives normalized longitudes
//! ([`words`]), their Magnus expansions give μ̄ and the longitudinal matrix
//! ([`milnor`]), and a determinant of that matrix gives Γ ([`factor`]), which
//! [`diagrams`] checks against skein-computed Conway polynomials.

pub mod cli;
pub mod diagrams;
pub mod factor;
pub mod milnor;
pub mod series;
pub mod words;

pub use diagrams::{
    conway_skein, linking_matrix, verify_factorization, LinkDiagram, StringLink, StringLinkDiagram,
    VerificationReport,
};
pub use factor::{conway_from_seifert, gamma, gamma_checks, lowest_coefficient, multi_lowest, phi_multi, phi_u, GammaResult};
pub use milnor::{c_matrix_from_fox, c_matrix_from_mu, chat_matrix, degeneracy_check, mu_table, LinkingData, MuTable};
pub use series::{conway_from_laurent, magnus_expand, ConwayPoly, LaurentPoly, MultiSeries, NCSeries, USeries, ZSeries};
pub use words::{artin_apply, longitudes_from_braid, normalize_longitude, pure_braids, Braid, Word};
