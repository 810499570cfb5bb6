pub mod bench;
pub mod dp;
pub mod lp;
pub mod network;
pub mod sddp;
pub mod stage;
pub mod wind;
