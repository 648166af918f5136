public class T {
    String s = "// url: http://x/y";
    // real comment (1974)
    char q = '\'';
    /* block "with quotes" */
}
