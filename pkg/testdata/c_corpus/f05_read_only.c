enum mode { MODE_IDLE, MODE_BUSY, MODE_DONE };

extern enum mode current_mode;

int can_start(void)
{
    enum mode m = MODE_IDLE;   /* initializer, not an assignment */
    if (current_mode == MODE_BUSY)
        return 0;
    return m == MODE_IDLE && current_mode != MODE_DONE;
}
