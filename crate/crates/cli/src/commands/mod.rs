pub mod analyze;
pub mod phase;
pub mod sim;
pub mod synth;
