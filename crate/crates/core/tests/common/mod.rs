//! Independent numeric oracles shared by integration tests.

pub mod psss;
