/* Usage: smoke MODELS_DIR RECORD_FILE. Prints the simplified record. */
#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "semsimp.h"

int main(int argc, char **argv) {
    if (argc != 3) return 64;
    FILE *f = fopen(argv[2], "rb");
    if (!f) return 66;
    static char record[1 << 16];
    size_t n = fread(record, 1, sizeof record - 1, f);
    fclose(f);
    while (n > 0 && (record[n - 1] == '\n' || record[n - 1] == '\r')) n--;
    record[n] = '\0';

    SemsimpPipeline *p = NULL;
    if (semsimp_pipeline_new(argv[1], NULL, 5, &p) != SEMSIMP_STATUS_OK) {
        fprintf(stderr, "load: %s\n", semsimp_last_error_message());
        return 1;
    }
    char *out = NULL;
    SemsimpStatus s = semsimp_pipeline_simplify(p, record, &out);
    if (s != SEMSIMP_STATUS_OK) {
        fprintf(stderr, "simplify: %s\n", semsimp_last_error_message());
        semsimp_pipeline_free(p);
        return 2;
    }
    puts(out);
    semsimp_string_free(out);
    semsimp_pipeline_free(p);
    return 0;
}
