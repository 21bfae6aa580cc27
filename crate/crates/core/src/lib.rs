//! Stochastic choice rules over composable outcome spaces.

pub mod axioms;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod extract;
pub mod hashing;
pub mod menu;
pub mod outcome;
pub mod quadrature;
pub mod rules;

pub use error::{Error, Result};
pub use menu::{equivalent, power, product, ActionId, ChoiceDistribution, Menu, MenuFile};
pub use outcome::{cumulants, Distribution, MeanStd, Outcome, OutcomeSpace, Side, Utility};
pub use rules::{Rule, Shock};
