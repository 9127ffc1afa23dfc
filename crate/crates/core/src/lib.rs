pub mod graph;
pub mod nl2star;
pub mod parser;
pub mod reasoner;
pub mod syntax;
