pub mod conditional;
pub mod credal;
pub mod demos;
pub mod error;
pub mod fubini;
pub mod lp;
pub mod penalty;
pub mod risk;
pub mod sampling;
pub mod space;
