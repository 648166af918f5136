def f():
    """Docstring, not a comment. # hash inside"""
    x = 1  # real one
    s = '# single-quoted'
    t = '''triple # also string'''
    return x


# module tail
