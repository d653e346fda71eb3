const char* a = "//not a comment";
const char* b = "/* nor this */";
char c = '"';
char d = '/'; // real comment
const char* e = "escaped \" // still string";
// const char* f = "commented out";
