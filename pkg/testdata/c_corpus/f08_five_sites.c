enum phase { PH_HELLO, PH_AUTH, PH_DATA, PH_BYE };

struct session {
    enum phase phase;
    int leaked;
};

static enum phase global_phase;

int on_message(struct session *conn, int type)
{
    enum phase next;

    switch (type) {
    case 0:
        conn->phase = PH_HELLO;
        break;
    case 1:
        if (conn->phase != PH_HELLO)
            return -1;
        conn->phase = PH_AUTH;
        break;
    case 2:
        next = PH_DATA;
        conn->phase = next;
        break;
    default:
        conn->phase = PH_BYE;
        global_phase = PH_BYE;
        conn->leaked++;
    }
    return 0;
}
