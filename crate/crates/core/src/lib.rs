pub mod cli;
pub mod format;
pub mod frd;
pub mod gadget;
pub mod modmath;
pub mod sampler;
pub mod scheme;
pub mod trapdoor;
