const char* a = "/* not a comment */";
const char* b = "// also not";
char c = '"';
const char* d = "escaped \" // still string";
/* real one */
const char* e = "ends"; // real two
