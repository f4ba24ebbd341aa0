enum conn_state { CS_NEW, CS_OPEN, CS_CLOSING, CS_CLOSED };

struct conn {
    enum conn_state cs;
    int retries;
};

void step(struct conn *c, int ok)
{
    if (!ok) c->cs = CS_CLOSED;
    c->cs =
        CS_OPEN;
    c->cs = ok ? CS_OPEN : CS_CLOSING;
    for (c->cs = CS_NEW; c->retries < 3; c->retries++)
        ;
    switch (c->cs) {
    case CS_OPEN:
        c->cs = CS_CLOSING;
        break;
    default:
        c->cs = CS_CLOSED; // closed from any other state
        break;
    }
}
