pub mod expansion;
pub mod runs;
pub mod schedule;
pub mod verify;
