pub mod game;
pub mod play;
pub mod analysis;
pub mod online;
pub mod synthesis;
pub mod generators;
