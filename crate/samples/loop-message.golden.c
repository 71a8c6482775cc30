#include "iostream"
#include "cstdio"
#include "string"
#include "thread"
#include "chrono"
using namespace std;

int main()
{
    /* print 1 to 3 */
    for (int x = 1; x <= 3; x++) {
        printf(" %d \n", x);
    }
    printf(" This message between number 3 and number 4 \n");
    /* continue with 4 to 10 */
    for (int x = 4; x <= 10; x++) {
        printf(" %d \n", x);
    }
    return 0;
}
