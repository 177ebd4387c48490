pub mod cli;
pub mod design;
pub mod exactmath;
pub mod he;
pub mod quantizer;
pub mod simloop;
