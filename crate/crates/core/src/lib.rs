pub mod group;
pub mod model;
pub mod pareto;
pub mod scenario;
pub mod service;
pub mod solver;
