#include <stddef.h>

/* array sizes are not constant expressions the scanner can evaluate */
enum sizes { SZ_BYTE = sizeof(char), SZ_INT = sizeof(int) };

typedef enum lexer_state { LS_START, LS_WORD, LS_NUMBER, LS_END } lexer_state_t;

static lexer_state_t ls;
static lexer_state_t history[4];

int lex_char(char c, size_t i)
{
    switch (ls) {
    case LS_START:
        if (c >= '0' && c <= '9') {
            ls = LS_NUMBER;
        } else {
            ls = LS_WORD;
        }
        break;
    case LS_WORD:
    case LS_NUMBER:
        if (c == ' ')
            ls = LS_END;
        break;
    default:
        break;
    }
    history[i % 4] = LS_START;
    return ls == LS_END;
}
