enum E { A = 5, B };

enum flags {
    F_NONE = 0,
    F_READ = 1 << 0,
    F_WRITE = 1 << 1,
    F_BOTH = F_READ | F_WRITE,
    F_NEXT
};

enum tok { T_SLASH = '/', T_NEXT, T_HEX = 0x20u, T_NEG = -3, T_AFTER };

static enum tok last_tok;
static enum flags open_mode;

void lex(char c)
{
    if (c == '/') {
        last_tok = T_SLASH;
    } else {
        last_tok = T_AFTER;
    }
}

void open_for(int w)
{
    open_mode = w ? 2 : 1;  /* not a named constant */
}
