pub mod cqed;
pub mod fdtd;
pub mod fit;
pub mod generate;
pub mod modes;
pub mod pipeline;
pub mod plot;
pub mod reproduce;
