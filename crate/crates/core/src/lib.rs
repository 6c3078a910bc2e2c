pub mod curvature;
pub mod expr;
pub mod forms;
pub mod jet;
pub mod models;
pub mod ode;
pub mod par;
pub mod ppwave;
pub mod report;
