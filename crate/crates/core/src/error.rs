/// Stable, documented identifier of an error variant.
///
/// The command line prints this name on stderr, so the strings returned here
/// must not change between releases.
pub trait ErrorName {
    fn name(&self) -> &'static str;
}
