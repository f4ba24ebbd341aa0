#include <string.h>

typedef enum { RTSP_INIT, RTSP_READY, RTSP_PLAYING } RTSPState;

typedef enum log_level {
    LOG_ERROR = 1,
    LOG_WARN,
    LOG_INFO,
    LOG_DEBUG = 10
} log_level_t;

struct rtsp_session {
    int cseq;
    RTSPState state;
};

static log_level_t g_log_level;
static RTSPState last_state;

void parse_args(int argc, char **argv)
{
    for (int i = 1; i < argc; i++) {
        if (strcmp(argv[i], "-v") == 0)
            g_log_level = LOG_DEBUG;
        else if (strcmp(argv[i], "-q") == 0)
            g_log_level = LOG_ERROR;
    }
}

int handle_cmd(struct rtsp_session *s, const char *cmd)
{
    if (strcmp(cmd, "SETUP") == 0) {
        s->state = RTSP_READY;
    } else if (strcmp(cmd, "PLAY") == 0 && s->state == RTSP_READY) {
        s->state = RTSP_PLAYING;
    } else if (strcmp(cmd, "TEARDOWN") == 0) {
        s->state = RTSP_INIT;
    } else {
        return -1;
    }
    last_state = RTSP_INIT;
    return 0;
}
