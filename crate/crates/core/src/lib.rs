pub mod bench;
pub mod dwdag;
pub mod formulation;
pub mod heuristics;
pub mod instgen;
pub mod schedule;
pub mod solver;
