//! Min-sum belief propagation for generalized min-cost network flow on
//! ratio-balanced graphs, with the residual-network analysis, computation
//! trees and an exact vertex-enumeration oracle used to certify it.

pub mod bp;
pub mod caps;
pub mod certify;
pub mod error;
pub mod generate;
pub mod io;
pub mod model;
pub mod oracle;
pub mod pwl;
pub mod ratio;
pub mod residual;
pub mod scalar;
pub mod tree;

pub use caps::SizeCaps;
pub use error::{Error, Result};
pub use model::{DirectedGraph, EdgeData, EdgeId, Endpoint, GmnfInstance, ValidationReport, VertexId};
pub use pwl::{ConvexPwl, Minimum};
pub use ratio::{GaugeCertificate, RatioVerdict, UndirectedCycle};
pub use scalar::{NumericMode, Rational, Scalar};
