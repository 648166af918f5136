int x = 1;
/* never closed
still comment
