//! Exact symbolic engine for partial actions of ℤ on the binary Cantor set.
//!
//! The crate works with clopen sets as canonical cylinder antichains and with
//! partial homeomorphisms as prefix-rewrite systems. On top of that it builds
//! the envelope relation of a partial action, the clopen filtration of a
//! generated (non-clopen) action with its Bratteli diagram, and finitely
//! supported models of the groupoid convolution algebra and the kernel algebra
//! together with the isomorphism between them.

pub mod cantor_space;
pub mod convolution;
pub mod envelope;
pub mod filtration;
pub mod locally_constant;
pub mod partial_action;
pub mod prefix_map;
pub mod sampling;
pub mod scalar;
pub mod union_find;

pub use cantor_space::{CantorError, ClopenSet, Point, Word};
pub use locally_constant::PiecewiseConstant;
pub use partial_action::{ActionError, Generator, ZPartialAction};
pub use prefix_map::{GeneratedMap, MapError, PrefixMap, PrefixRule};
pub use scalar::Scalar;
