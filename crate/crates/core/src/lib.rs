pub mod games;
pub mod matcore;
pub mod prob;
pub mod strategy;
pub mod values;
pub mod infotheory;
pub mod depbreak;
pub mod corrsamp;
pub mod reduction;
