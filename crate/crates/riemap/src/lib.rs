//! Numerical differential geometry for maps between coordinate charts.
//!
//! The crate represents Riemannian and almost Hermitian manifolds as single
//! coordinate charts whose metric and complex-structure components are parsed
//! scalar expressions, differentiated exactly with second-order forward jets.
//! On top of that it builds the calculus of Riemannian maps — differential,
//! kernel/horizontal and range/normal splittings, second fundamental form,
//! tension field, shape operator — and verifies the identities tying those
//! objects together (Riemannian-map condition, holomorphicity, the Gauss
//! equation, harmonicity/minimality of the range distribution) as numerical
//! residuals over sampled points.
//!
//! Start with the runnable examples:
//!
//! ```text
//! cargo run --example parse_and_eval          # expression DSL and jets
//! cargo run --example curvature               # charts, Christoffels, curvature
//! cargo run --example tangent_splitting       # frames and map defects
//! cargo run --example second_fundamental_form # ∇F_*, tension, shape operator
//! cargo run --example verify_identities       # full check suite on one scenario
//! cargo run --example gallery_tour            # every scenario vs. its expectation
//! cargo run --example custom_manifest         # author and run your own manifest
//! ```
//!
//! The same machinery is exposed on the command line:
//!
//! ```text
//! riemap check gallery:paper_example --points 100 --seed 42
//! riemap gallery list
//! ```

pub mod checks;
pub mod cli;
pub mod error;
pub mod expr;
pub mod gallery;
pub mod geometry;
pub mod jet;
pub mod linalg;
pub mod manifest;
pub mod map;
pub mod report;
pub mod sample;

pub use checks::{
    CheckAggregate, CheckId, CheckReport, CheckResult, CheckStatus, Overall, Sampling, Scenario,
    Tolerances,
};
pub use error::{Error, Result};
pub use expr::{DerivMode, ExprAst};
pub use geometry::{ChartManifold, ConnectionData, CurvatureData, MetricJets};
pub use jet::ScalarJet2;
pub use manifest::{load_manifest, ScenarioManifest};
pub use map::{MapHessianData, ShapeOperatorData, SmoothMap, TangentSplit};
