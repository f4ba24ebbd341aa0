enum err_code { ERR_OK = 0, ERR_SHORT = -1, ERR_BAD = -2 };

static enum err_code parse_header(const unsigned char *p, int n)
{
    if (n < 4)
        return ERR_SHORT;
    return p[0] == 0x52 ? ERR_OK : ERR_BAD;
}

int parse(const unsigned char *p, int n)
{
    enum err_code rc;
    rc = parse_header(p, n);
    if (rc == ERR_SHORT && n == 0) {
        rc = ERR_OK;
    }
    return (int)rc;
}
