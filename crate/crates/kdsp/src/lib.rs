//! Disjoint shortest paths on layered undirected graphs.
//!
//! A *shortest graph* is an undirected graph together with one partial
//! level assignment per colour, such that every edge crosses consecutive
//! levels of at least one colour. A *colour path* steps level by level, so
//! it is automatically a shortest path in its colour. Given requests
//! (source, target, colour), the solvers look for one colour path per
//! request such that distinct paths share no vertex except possibly
//! identical terminal vertices.
//!
//! The crate splits into:
//! - [`graph`], [`layering`]: the layered-graph model and its validation;
//! - [`bicolored`]: components of doubly-coloured edges, their offset
//!   invariants, conflicts, and the sees/blind predicates;
//! - [`reach`], [`blind`]: reachability indexes and the product-digraph
//!   search that decides the blind case;
//! - [`solver`]: the budgeted segment-decomposition search on top of it;
//! - [`oracle`]: independent brute force for verification;
//! - [`reductions`]: relaxations, the DAG embedding, and terminal splitting;
//! - [`format`], [`gen`]: file formats and seeded generators.

pub mod bicolored;
pub mod blind;
pub mod gen;
pub mod graph;
pub mod layering;
pub mod oracle;
pub mod reach;
pub mod format;
pub mod reductions;
pub mod solver;
