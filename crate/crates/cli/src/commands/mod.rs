pub mod capture;
pub mod cost;
pub mod isp;
pub mod pack;
pub mod stats;
pub mod sweep;
