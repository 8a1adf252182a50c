//! Exact computations around graded Lie algebras of parahoric subgroups over
//! local function fields, twisted loop algebras, covolume arithmetic and
//! subgroup-growth bounds. All arithmetic is exact: prime fields for Lie
//! algebras, arbitrary-precision rationals for volumes.

pub mod arith;
pub mod chevalley;
pub mod cli;
pub mod fp;
pub mod growth;
pub mod loopcore;
pub mod parahoric;
pub mod rootsys;
