#include "ext/parser.h"

enum { POWER_OFF, POWER_ON } power;

typedef enum {
    PARSING_PACK_HEADER,
    PARSING_SYSTEM_HEADER,
    PARSING_PES_PACKET
} MPEGParseState;

void power_toggle(void)
{
    if (power == POWER_OFF) {
        power = POWER_ON;
    } else {
        power = POWER_OFF;
    }
}

void parse_step(struct parser *parser)
{
    /* the struct lives in a header that is not scanned */
    parser->fCurrentParseState = PARSING_SYSTEM_HEADER;
    parser->fCurrentParseState = PARSING_PES_PACKET;
}
