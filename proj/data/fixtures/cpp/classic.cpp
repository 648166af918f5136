/**
 * Doc block with a gutter.
 */
class Foo {
    // nested /* does nothing
    int y_; /* one */ /* two */
};
