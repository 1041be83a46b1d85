//! Physical variables (z, h) against hodograph variables (x, u), the
//! contact-line law, and the transport of the expansion at x = 0.

mod kinematics;
mod profile;
mod series;
mod transport;

pub use kinematics::{contact_line, velocity_consistency, velocity_profile, ContactLine, VelocityTrack};
pub use profile::{from_hodograph, to_hodograph, PhysicalProfile};
pub use series::Series;
pub use transport::{transport_expansion, transport_series, TransportedExpansion};
